#include "qrdro/conic_export.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace qrdro::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr const char* kMagic = "conic-program";
constexpr int kVersion = 1;

class Builder {
 public:
  std::size_t var(std::string name, double lower, double upper) {
    prog.variables.push_back({std::move(name), lower, upper});
    return prog.variables.size() - 1;
  }
  std::size_t expr(AffineExpr e) {
    prog.expressions.push_back(std::move(e));
    return prog.expressions.size() - 1;
  }
  void row(AffineExpr e) { prog.linear_rows.push_back(expr(std::move(e))); }
  void soc(AffineExpr head, std::vector<AffineExpr> members) {
    SocBlock b;
    b.head = expr(std::move(head));
    for (auto& m : members) b.members.push_back(expr(std::move(m)));
    prog.soc_blocks.push_back(std::move(b));
  }

  ConicProgram prog;
};

AffineExpr plus(AffineExpr e, std::size_t var, double coef) {
  e.terms.emplace_back(var, coef);
  return e;
}

// One inner infimum inf_z [a z + b + mult (z - y)^2] over [lo, hi] written as
//   ||(B, C - mult)|| <= C + mult,  C >= 0,
// with B = a - lower + upper - 2 mult y and C = mult y^2 + b + lower lo - upper hi - bound.
// `b` and `bound` are affine in the program variables.
void add_inner_cone(Builder& bld, double a, const AffineExpr& b, std::size_t mult,
                    std::size_t lower, std::size_t upper, double y, double lo, double hi,
                    const AffineExpr& bound_term) {
  AffineExpr C = b;
  C.terms.emplace_back(mult, y * y);
  C.terms.emplace_back(lower, lo);
  C.terms.emplace_back(upper, -hi);
  C.constant += bound_term.constant;
  for (const auto& t : bound_term.terms) C.terms.push_back(t);
  AffineExpr B{a, {{lower, -1.0}, {upper, 1.0}, {mult, -2.0 * y}}};
  bld.soc(plus(C, mult, 1.0), {B, plus(C, mult, -1.0)});
  bld.row(C);
}

std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

void write_expr(std::ostream& out, const AffineExpr& e) {
  out << fmt_num(e.constant) << ' ' << e.terms.size();
  for (const auto& [i, c] : e.terms) out << ' ' << i << ':' << fmt_num(c);
}

double parse_num(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw std::runtime_error(fmt::format("line {}: expected a number, got '{}'", line, tok));
  return v;
}

std::size_t parse_index(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (tok.empty() || tok[0] == '-' || end != tok.c_str() + tok.size())
    throw std::runtime_error(fmt::format("line {}: expected an index, got '{}'", line, tok));
  return static_cast<std::size_t>(v);
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  // Next non-empty, non-comment line split into tokens.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (!toks.empty()) return toks;
    }
    throw std::runtime_error(fmt::format("line {}: unexpected end of input", line_no_));
  }

  std::vector<std::string> expect(const std::string& keyword, std::size_t min_tokens) {
    auto toks = next();
    if (toks[0] != keyword || toks.size() < min_tokens)
      throw std::runtime_error(fmt::format("line {}: expected '{}' line", line_no_, keyword));
    return toks;
  }

  AffineExpr expr(const std::vector<std::string>& toks, std::size_t at) {
    if (toks.size() < at + 2) throw std::runtime_error(fmt::format("line {}: truncated expression", line_no_));
    AffineExpr e;
    e.constant = parse_num(toks[at], line_no_);
    const std::size_t k = parse_index(toks[at + 1], line_no_);
    if (toks.size() != at + 2 + k)
      throw std::runtime_error(fmt::format("line {}: expected {} terms", line_no_, k));
    for (std::size_t j = 0; j < k; ++j) {
      const auto& t = toks[at + 2 + j];
      const auto colon = t.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error(fmt::format("line {}: term '{}' is not index:coefficient", line_no_, t));
      e.terms.emplace_back(parse_index(t.substr(0, colon), line_no_),
                           parse_num(t.substr(colon + 1), line_no_));
    }
    return e;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

void check_indices(const ConicProgram& p) {
  auto check_expr = [&](const AffineExpr& e) {
    for (const auto& [i, c] : e.terms)
      if (i >= p.variables.size()) throw std::runtime_error(fmt::format("variable index {} out of range", i));
  };
  check_expr(p.objective);
  for (const auto& e : p.expressions) check_expr(e);
  for (auto r : p.linear_rows)
    if (r >= p.expressions.size()) throw std::runtime_error(fmt::format("row expression {} out of range", r));
  for (const auto& b : p.soc_blocks) {
    if (b.head >= p.expressions.size()) throw std::runtime_error(fmt::format("cone head {} out of range", b.head));
    for (auto m : b.members)
      if (m >= p.expressions.size()) throw std::runtime_error(fmt::format("cone member {} out of range", m));
  }
}

struct Multipliers {
  double lower = 0.0;
  double upper = 0.0;
};

// Clamp multipliers of inf_z [a z + mult (z - y)^2] over [lo, hi], using the same
// clamping rule as the dual kernels.
Multipliers clamp_multipliers(double a, double mult, double y, double lo, double hi) {
  if (mult == 0.0) return {a, 0.0};
  const double z = y - a / (2.0 * mult);
  if (z <= lo) return {a + 2.0 * mult * (lo - y), 0.0};
  if (z >= hi) return {0.0, -(a + 2.0 * mult * (hi - y))};
  return {};
}

}  // namespace

std::size_t ConicProgram::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return i;
  throw std::out_of_range("no variable named " + name);
}

ConicProgram build_socp(const ModelParams& params, const WassersteinAmbiguity& amb,
                        std::optional<double> tau) {
  if (tau && !(*tau >= 0.0)) throw std::invalid_argument(fmt::format("tau must be >= 0, got {}", *tau));
  if (params.support_lo() != amb.support_lo() || params.support_hi() != amb.support_hi())
    throw std::invalid_argument("model support differs from ambiguity support");
  const auto y = amb.samples().view();
  if (y.empty()) throw std::invalid_argument("conic program needs at least one sample");
  const double n = static_cast<double>(y.size());
  const double eps2 = amb.radius() * amb.radius();
  const double lo = amb.support_lo();
  const double hi = amb.support_hi();
  const double p = params.p();
  const double omp = params.one_minus_p();
  const double c = params.c();
  const double c_m = params.c_m();
  const double delta = params.delta();

  Builder bld;
  const std::size_t x = bld.var("x", params.box_lo(), params.box_hi());
  const std::size_t q = bld.var("q", params.box_lo(), params.box_hi());
  const std::size_t lambda = bld.var("lambda", 0.0, kInf);
  bld.prog.objective.terms.emplace_back(lambda, -eps2);
  bld.row({0.0, {{x, 1.0}, {q, -1.0}}});

  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t gamma = bld.var(fmt::format("gamma[{}]", i), -kInf, kInf);
    const std::size_t theta = bld.var(fmt::format("theta[{}]", i), 0.0, kInf);
    const std::size_t eta = bld.var(fmt::format("eta[{}]", i), 0.0, kInf);
    const std::size_t phi = bld.var(fmt::format("phi[{}]", i), 0.0, kInf);
    const std::size_t psi = bld.var(fmt::format("psi[{}]", i), 0.0, kInf);
    bld.prog.objective.terms.emplace_back(gamma, 1.0 / n);
    const AffineExpr minus_gamma{0.0, {{gamma, -1.0}}};
    add_inner_cone(bld, p * omp, {0.0, {{x, -c_m}, {q, -c}}}, lambda, theta, eta, y[i], lo, hi,
                   minus_gamma);
    add_inner_cone(bld, (p - c - delta) * omp, {0.0, {{x, -c_m}, {q, delta}}}, lambda, phi, psi,
                   y[i], lo, hi, minus_gamma);
    bld.row({0.0, {{x, p - c - delta - c_m}, {q, delta}, {gamma, -1.0}}});
  }

  if (tau) {
    const std::size_t alpha = bld.var("alpha", 0.0, kInf);
    AffineExpr budget{0.0, {{alpha, -eps2}}};
    for (std::size_t i = 0; i < y.size(); ++i) {
      const std::size_t kappa = bld.var(fmt::format("kappa[{}]", i), -kInf, kInf);
      const std::size_t beta = bld.var(fmt::format("beta[{}]", i), 0.0, kInf);
      const std::size_t zeta = bld.var(fmt::format("zeta[{}]", i), 0.0, kInf);
      budget.terms.emplace_back(kappa, -1.0 / n);
      add_inner_cone(bld, (1.0 + *tau) * omp, {0.0, {{x, -1.0}}}, alpha, beta, zeta, y[i], lo, hi,
                     {0.0, {{kappa, 1.0}}});
      bld.row({0.0, {{kappa, 1.0}, {x, *tau}}});
    }
    bld.row(std::move(budget));
  }
  return std::move(bld.prog);
}

void serialize(std::ostream& out, const ConicProgram& prog) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "variables " << prog.variables.size() << '\n';
  for (const auto& v : prog.variables)
    out << "var " << v.name << ' ' << fmt_num(v.lower) << ' ' << fmt_num(v.upper) << '\n';
  out << "objective max ";
  write_expr(out, prog.objective);
  out << '\n';
  out << "expressions " << prog.expressions.size() << '\n';
  for (const auto& e : prog.expressions) {
    out << "expr ";
    write_expr(out, e);
    out << '\n';
  }
  out << "rows " << prog.linear_rows.size() << '\n';
  for (auto r : prog.linear_rows) out << "row " << r << '\n';
  out << "socs " << prog.soc_blocks.size() << '\n';
  for (const auto& b : prog.soc_blocks) {
    out << "soc " << b.head << ' ' << b.members.size();
    for (auto m : b.members) out << ' ' << m;
    out << '\n';
  }
  out << "end\n";
}

std::string serialize(const ConicProgram& program) {
  std::ostringstream out;
  serialize(out, program);
  return out.str();
}

ConicProgram parse(const std::string& text) {
  Reader rd(text);
  ConicProgram prog;
  auto head = rd.expect(kMagic, 2);
  if (head.size() != 2 || parse_index(head[1], rd.line()) != kVersion)
    throw std::runtime_error(fmt::format("line {}: unsupported format version", rd.line()));

  const std::size_t nv = parse_index(rd.expect("variables", 2)[1], rd.line());
  for (std::size_t i = 0; i < nv; ++i) {
    auto t = rd.expect("var", 4);
    if (t.size() != 4) throw std::runtime_error(fmt::format("line {}: expected 'var name lower upper'", rd.line()));
    prog.variables.push_back({t[1], parse_num(t[2], rd.line()), parse_num(t[3], rd.line())});
  }
  auto obj = rd.expect("objective", 4);
  if (obj[1] != "max") throw std::runtime_error(fmt::format("line {}: objective sense must be 'max'", rd.line()));
  prog.objective = rd.expr(obj, 2);

  const std::size_t ne = parse_index(rd.expect("expressions", 2)[1], rd.line());
  for (std::size_t i = 0; i < ne; ++i) prog.expressions.push_back(rd.expr(rd.expect("expr", 3), 1));

  const std::size_t nr = parse_index(rd.expect("rows", 2)[1], rd.line());
  for (std::size_t i = 0; i < nr; ++i) {
    auto t = rd.expect("row", 2);
    if (t.size() != 2) throw std::runtime_error(fmt::format("line {}: expected 'row index'", rd.line()));
    prog.linear_rows.push_back(parse_index(t[1], rd.line()));
  }

  const std::size_t ns = parse_index(rd.expect("socs", 2)[1], rd.line());
  for (std::size_t i = 0; i < ns; ++i) {
    auto t = rd.expect("soc", 3);
    SocBlock b;
    b.head = parse_index(t[1], rd.line());
    const std::size_t k = parse_index(t[2], rd.line());
    if (t.size() != 3 + k) throw std::runtime_error(fmt::format("line {}: expected {} cone members", rd.line(), k));
    for (std::size_t j = 0; j < k; ++j) b.members.push_back(parse_index(t[3 + j], rd.line()));
    prog.soc_blocks.push_back(std::move(b));
  }
  rd.expect("end", 1);
  check_indices(prog);
  return prog;
}

double evaluate(const AffineExpr& expr, const std::vector<double>& assignment) {
  double v = expr.constant;
  for (const auto& [i, c] : expr.terms) v += c * assignment.at(i);
  return v;
}

FeasibilityReport check_candidate(const ConicProgram& prog, const std::vector<double>& a) {
  if (a.size() != prog.variables.size())
    throw std::invalid_argument(fmt::format("assignment has {} values for {} variables", a.size(),
                                            prog.variables.size()));
  FeasibilityReport rep;
  rep.objective = evaluate(prog.objective, a);
  auto note = [&](double violation, const std::string& where) {
    if (violation > rep.max_violation) {
      rep.max_violation = violation;
      rep.worst = where;
    }
  };
  for (std::size_t i = 0; i < prog.variables.size(); ++i) {
    const auto& v = prog.variables[i];
    note(v.lower - a[i], "lower bound of " + v.name);
    note(a[i] - v.upper, "upper bound of " + v.name);
  }
  for (std::size_t r = 0; r < prog.linear_rows.size(); ++r)
    note(-evaluate(prog.expressions[prog.linear_rows[r]], a), fmt::format("row {}", r));
  for (std::size_t s = 0; s < prog.soc_blocks.size(); ++s) {
    const auto& b = prog.soc_blocks[s];
    double norm2 = 0.0;
    for (auto m : b.members) {
      const double v = evaluate(prog.expressions[m], a);
      norm2 += v * v;
    }
    note(std::sqrt(norm2) - evaluate(prog.expressions[b.head], a), fmt::format("cone {}", s));
  }
  return rep;
}

std::vector<double> lift_solution(const ModelParams& params, const WassersteinAmbiguity& amb,
                                  const Policy& policy, std::optional<double> tau) {
  if (!(amb.radius() > 0.0))
    throw std::invalid_argument("lifting needs a positive radius: at radius 0 the dual optimum is not attained");
  const ConicProgram prog = build_socp(params, amb, tau);
  std::vector<double> a(prog.variables.size(), 0.0);
  const auto y = amb.samples().view();
  const double lo = amb.support_lo();
  const double hi = amb.support_hi();
  const double omp = params.one_minus_p();

  const auto dual = worst_case_expected_profit(params, policy, amb);
  a[prog.index_of("x")] = policy.x;
  a[prog.index_of("q")] = policy.q;
  const double lambda = dual.lambda_star;
  a[prog.index_of("lambda")] = lambda;
  const double slope1 = params.p() * omp;
  const double slope2 = (params.p() - params.c() - params.delta()) * omp;
  // Variables are laid out per sample as gamma, theta, eta, phi, psi after x, q, lambda.
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t base = 3 + 5 * i;
    const auto m1 = clamp_multipliers(slope1, lambda, y[i], lo, hi);
    const auto m2 = clamp_multipliers(slope2, lambda, y[i], lo, hi);
    a[base] = dual.per_sample_infima[i];
    a[base + 1] = m1.lower;
    a[base + 2] = m1.upper;
    a[base + 3] = m2.lower;
    a[base + 4] = m2.upper;
  }
  if (tau) {
    const auto sup = wtc_sup(params, policy.x, *tau, amb);
    const std::size_t alpha_idx = prog.index_of("alpha");
    a[alpha_idx] = sup.alpha_star;
    const double slope = (1.0 + *tau) * omp;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const std::size_t base = alpha_idx + 1 + 3 * i;
      const auto m = clamp_multipliers(slope, sup.alpha_star, y[i], lo, hi);
      a[base] = sup.per_sample_sups[i];
      a[base + 1] = m.lower;
      a[base + 2] = m.upper;
    }
  }
  return a;
}

}  // namespace qrdro::conic
