#include "ddpce/regression.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "ddpce/error.hpp"
#include "ddpce/kernels.hpp"
#include "ddpce/text.hpp"

namespace ddpce::regression {
namespace {

using Index = Eigen::Index;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cholesky {
  Eigen::MatrixXd lower;
  bool ok = true;
  double min_pivot = kInf;
  Index failed_at = -1;
};

// Plain right-looking Cholesky; reports the first pivot that is not
// safely positive relative to the largest diagonal entry.
Cholesky cholesky(const Eigen::MatrixXd& g) {
  const Index n = g.rows();
  Cholesky c;
  c.lower = Eigen::MatrixXd::Zero(n, n);
  const double scale = n > 0 ? g.diagonal().cwiseAbs().maxCoeff() : 1.0;
  for (Index j = 0; j < n; ++j) {
    const double d = g(j, j) - c.lower.row(j).head(j).squaredNorm();
    c.min_pivot = std::min(c.min_pivot, d);
    if (!(d > 1e-13 * scale)) {
      c.ok = false;
      c.failed_at = j;
      return c;
    }
    const double ljj = std::sqrt(d);
    c.lower(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      c.lower(i, j) = (g(i, j) - c.lower.row(i).head(j).dot(c.lower.row(j).head(j))) / ljj;
    }
  }
  return c;
}

void check_response(const DesignMatrix& design, const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(y.size()) != design.rows())
    throw Error(ErrorKind::Config, "response length " + std::to_string(y.size()) +
                                       " does not match design rows " + std::to_string(design.rows()));
  if (!y.allFinite()) throw Error(ErrorKind::Config, "response contains non-finite values");
}

Eigen::VectorXd solve_weighted(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * psi;
  const Eigen::VectorXd b = sw.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < a.cols()) {
    throw Error(ErrorKind::RankDeficient,
                "weighted design has numerical rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(a.cols()) + " columns");
  }
  return qr.solve(b);
}

double weighted_rms(const Eigen::MatrixXd& psi, const Eigen::VectorXd& c, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w) {
  const Eigen::VectorXd r = y - psi * c;
  return std::sqrt(w.dot(r.cwiseProduct(r)) / static_cast<double>(y.size()));
}

DesignMatrix columns(const DesignMatrix& design, const std::vector<std::size_t>& cols) {
  DesignMatrix sub{Eigen::MatrixXd(design.psi.rows(), static_cast<Index>(cols.size()))};
  for (std::size_t k = 0; k < cols.size(); ++k) sub.psi.col(static_cast<Index>(k)) = design.psi.col(static_cast<Index>(cols[k]));
  return sub;
}

}  // namespace

Scheme Scheme::parse(const std::string& t) {
  if (t == "ols") return ols();
  if (t == "cls") return cls();
  for (const std::string prefix : {"tempered:", "alpha:"}) {
    if (t.rfind(prefix, 0) == 0) {
      const auto a = text::parse_finite(std::string_view(t).substr(prefix.size()));
      if (!a) break;
      return tempered(*a);
    }
  }
  throw Error(ErrorKind::Config, "unknown regression scheme '" + t + "' (ols, cls, tempered:<alpha>)");
}

std::string Scheme::label() const {
  switch (kind_) {
    case Kind::Ols: return "OLS";
    case Kind::Cls: return "CLS";
    case Kind::Tempered: return "alpha=" + text::format_short(exponent_);
  }
  return "?";
}

DesignMatrix assemble_design(const basis::MultivariateBasis& basis, const sampling::SampleSet& samples) {
  if (basis.dim() != samples.dim())
    throw Error(ErrorKind::Config, "basis has " + std::to_string(basis.dim()) + " dimensions, samples have " +
                                       std::to_string(samples.dim()));
  return DesignMatrix{kernels::parallel::assemble_design(basis, samples.x())};
}

Eigen::MatrixXd gram(const DesignMatrix& design, const Eigen::VectorXd& weights) {
  const double m = static_cast<double>(design.rows());
  Eigen::MatrixXd g;
  if (weights.size() == 0) {
    g = design.psi.transpose() * design.psi / m;
  } else {
    if (weights.size() != design.psi.rows())
      throw Error(ErrorKind::Config, "weight vector length does not match design rows");
    g = design.psi.transpose() * weights.asDiagonal() * design.psi / m;
  }
  return 0.5 * (g + g.transpose());
}

double condition_number(const Eigen::MatrixXd& sym) {
  if (sym.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : kInf;
}

double stability_score(std::size_t m, double kappa) {
  const double lm = std::log(static_cast<double>(m));
  if (lm <= 0.0) return kInf;
  return static_cast<double>(m) / (kappa * lm);
}

ChristoffelDiagnostics christoffel(const DesignMatrix& design) {
  const Eigen::MatrixXd g = gram(design);
  const Cholesky chol = cholesky(g);
  if (!chol.ok) {
    throw Error(ErrorKind::IllConditioned,
                "Gram matrix is not positive definite: Cholesky pivot " + std::to_string(chol.failed_at) +
                    " is " + text::format_double(chol.min_pivot) + " (M = " + std::to_string(design.rows()) +
                    ", N = " + std::to_string(design.cols()) + "); lower the degree or add samples");
  }
  ChristoffelDiagnostics d;
  d.leverage = kernels::parallel::leverage(design.psi, chol.lower);
  d.kappa = d.leverage.maxCoeff();
  d.gram_condition = condition_number(g);
  d.score_lr = stability_score(design.rows(), d.kappa);
  d.min_pivot = chol.min_pivot;
  return d;
}

WeightedDiagnostics weighted_diagnostics(const DesignMatrix& design, const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd gw = gram(design, weights);
  WeightedDiagnostics d;
  d.gram_condition = condition_number(gw);
  const Cholesky chol = cholesky(gw);
  if (!chol.ok) {
    d.kappa = kInf;
    d.score_lr = 0.0;
    return d;
  }
  d.kappa = kernels::parallel::leverage(design.psi, chol.lower).maxCoeff();
  d.score_lr = stability_score(design.rows(), d.kappa);
  return d;
}

WeightVector weights(const ChristoffelDiagnostics& diag, const Scheme& scheme) {
  const Eigen::VectorXd& k = diag.leverage;
  const Index m = k.size();
  if (m == 0) throw Error(ErrorKind::Config, "no Christoffel values to weight");
  const double alpha = scheme.exponent();
  if (!std::isfinite(alpha)) throw Error(ErrorKind::NumericRange, "tempering exponent is not finite");

  // w_i = M K_i^a / sum_j K_j^a, evaluated as exp(a ln K_i - max) to avoid overflow.
  Eigen::VectorXd logs(m);
  for (Index i = 0; i < m; ++i) {
    if (!(k(i) > 0.0) || !std::isfinite(k(i)))
      throw Error(ErrorKind::NumericRange, "Christoffel value " + std::to_string(i) + " is not positive and finite");
    logs(i) = alpha == 0.0 ? 0.0 : alpha * std::log(k(i));
  }
  const double top = logs.maxCoeff();
  Eigen::VectorXd e(m);
  for (Index i = 0; i < m; ++i) e(i) = std::exp(logs(i) - top);
  const double sum = e.sum();
  WeightVector out{Eigen::VectorXd(m), scheme};
  for (Index i = 0; i < m; ++i) {
    out.w(i) = static_cast<double>(m) * e(i) / sum;
    if (!(out.w(i) > 0.0) || !std::isfinite(out.w(i)))
      throw Error(ErrorKind::NumericRange, "weight " + std::to_string(i) + " under/overflowed for " + scheme.label());
  }
  return out;
}

FitResult fit(const DesignMatrix& design, const Eigen::VectorXd& y, const Scheme& scheme) {
  check_response(design, y);
  if (design.rows() < design.cols()) {
    throw Error(ErrorKind::Underdetermined,
                "M = " + std::to_string(design.rows()) + " samples < N = " + std::to_string(design.cols()) +
                    " basis terms; use sparse selection or draw more samples");
  }
  FitResult r;
  r.diagnostics = christoffel(design);
  r.weights = weights(r.diagnostics, scheme);
  r.coefficients = solve_weighted(design.psi, y, r.weights.w);
  r.residual_rms = weighted_rms(design.psi, r.coefficients, y, r.weights.w);
  r.weighted = weighted_diagnostics(design, r.weights.w);
  r.active_set.resize(design.cols());
  std::iota(r.active_set.begin(), r.active_set.end(), std::size_t{0});
  return r;
}

FitResult sparse_fit(const DesignMatrix& design, const Eigen::VectorXd& y, const Scheme& scheme,
                     const SparseTarget& target) {
  check_response(design, y);
  const Index m = design.psi.rows();
  const Index n = design.psi.cols();

  FitResult r;
  bool full_diagnostics = false;
  if (m >= n) {
    try {
      r.diagnostics = christoffel(design);
      full_diagnostics = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditioned) throw;
    }
  }
  if (full_diagnostics) {
    r.weights = weights(r.diagnostics, scheme);
  } else if (scheme.exponent() == 0.0) {
    r.weights = WeightVector{Eigen::VectorXd::Ones(m), scheme};
  } else {
    throw Error(ErrorKind::Underdetermined,
                "Christoffel weighting needs a positive-definite Gram matrix (M = " + std::to_string(m) +
                    ", N = " + std::to_string(n) + "); use ols or draw more samples");
  }

  const Eigen::VectorXd sw = r.weights.w.cwiseSqrt();
  const Eigen::MatrixXd phi = sw.asDiagonal() * design.psi;
  const Eigen::VectorXd b = sw.cwiseProduct(y);
  const double b_norm = b.norm();
  const Eigen::VectorXd col_norm = phi.colwise().norm().transpose();

  std::size_t limit = static_cast<std::size_t>(std::min(m, n));
  if (target.max_terms) limit = std::min(limit, *target.max_terms);
  const double eps = target.rel_residual.value_or(0.0);

  std::vector<std::size_t> active;
  std::vector<char> excluded(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd residual = b;
  Eigen::VectorXd coef_active;

  while (active.size() < limit) {
    if (residual.norm() <= eps * b_norm) break;
    Index best = -1;
    double best_corr = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (excluded[static_cast<std::size_t>(j)] || !(col_norm(j) > 0.0)) continue;
      const double corr = std::abs(phi.col(j).dot(residual)) / col_norm(j);
      if (corr > best_corr) {
        best_corr = corr;
        best = j;
      }
    }
    if (best < 0 || best_corr <= 1e-14 * std::max(b_norm, 1e-300)) break;

    excluded[static_cast<std::size_t>(best)] = 1;
    active.push_back(static_cast<std::size_t>(best));
    const DesignMatrix sub = columns(DesignMatrix{phi}, active);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub.psi);
    if (qr.rank() < sub.psi.cols()) {
      // Column is dependent on the active set; keep it excluded.
      active.pop_back();
      continue;
    }
    coef_active = qr.solve(b);
    const Eigen::VectorXd next = b - sub.psi * coef_active;
    const bool stagnated = next.norm() >= residual.norm() * (1.0 - 1e-12);
    residual = next;
    if (stagnated) break;
  }

  std::sort(active.begin(), active.end());
  r.coefficients = Eigen::VectorXd::Zero(n);
  if (!active.empty()) {
    const DesignMatrix sub = columns(design, active);
    const Eigen::VectorXd c = solve_weighted(sub.psi, y, r.weights.w);
    for (std::size_t k = 0; k < active.size(); ++k) r.coefficients(static_cast<Index>(active[k])) = c(static_cast<Index>(k));
  }
  r.residual_rms = weighted_rms(design.psi, r.coefficients, y, r.weights.w);
  if (full_diagnostics) {
    r.weighted = weighted_diagnostics(design, r.weights.w);
  } else if (!active.empty()) {
    const DesignMatrix sub = columns(design, active);
    try {
      r.diagnostics = christoffel(sub);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditioned) throw;
      r.diagnostics.kappa = kInf;
      r.diagnostics.gram_condition = kInf;
    }
    r.weighted = weighted_diagnostics(sub, r.weights.w);
  }
  r.active_set = std::move(active);
  return r;
}

// Format:
//   ddpce-fit 1
//   scheme <ols|cls|tempered> <exponent>
//   log_base e
//   <key> <value>           (diagnostic scalars)
//   active K i_1 .. i_K
//   coefficients N
//   c <value>               (N lines)
//   end

void write_fit(const FitResult& f, std::ostream& os) {
  using text::format_double;
  const char* kind = f.weights.scheme.kind() == Scheme::Kind::Ols   ? "ols"
                     : f.weights.scheme.kind() == Scheme::Kind::Cls ? "cls"
                                                                    : "tempered";
  os << "ddpce-fit 1\n";
  os << "scheme " << kind << ' ' << format_double(f.weights.scheme.exponent()) << '\n';
  os << "log_base e\n";
  os << "kappa " << format_double(f.diagnostics.kappa) << '\n';
  os << "score_lr " << format_double(f.diagnostics.score_lr) << '\n';
  os << "gram_condition " << format_double(f.diagnostics.gram_condition) << '\n';
  os << "weighted_kappa " << format_double(f.weighted.kappa) << '\n';
  os << "weighted_score_lr " << format_double(f.weighted.score_lr) << '\n';
  os << "weighted_gram_condition " << format_double(f.weighted.gram_condition) << '\n';
  os << "residual_rms " << format_double(f.residual_rms) << '\n';
  os << "active " << f.active_set.size();
  for (auto i : f.active_set) os << ' ' << i;
  os << '\n';
  os << "coefficients " << f.coefficients.size() << '\n';
  for (double c : f.coefficients) os << "c " << format_double(c) << '\n';
  os << "end\n";
}

namespace {

double parse_stat(std::string_view s) {
  if (s == "inf") return kInf;
  if (auto v = text::parse_finite(s)) return *v;
  throw Error(ErrorKind::Parse, "fit file: invalid number '" + std::string(s) + "'");
}

}  // namespace

FitResult read_fit(std::istream& is) {
  auto fail = [](const std::string& msg) -> void { throw Error(ErrorKind::Parse, "fit file: " + msg); };
  std::string line;
  auto next = [&](std::string_view key) {
    std::vector<std::string> tok;
    while (tok.empty()) {
      if (!std::getline(is, line)) fail("unexpected end, expected '" + std::string(key) + "'");
      for (auto t : text::split_ws(text::trim(line))) tok.emplace_back(t);
    }
    if (tok[0] != key) fail("expected '" + std::string(key) + "', found '" + tok[0] + "'");
    return tok;
  };

  auto head = next("ddpce-fit");
  if (head.size() != 2 || head[1] != "1") fail("unsupported version");
  auto sch = next("scheme");
  if (sch.size() != 3) fail("malformed scheme line");
  const double exponent = parse_stat(sch[2]);
  FitResult f;
  if (sch[1] == "ols") f.weights.scheme = Scheme::ols();
  else if (sch[1] == "cls") f.weights.scheme = Scheme::cls();
  else if (sch[1] == "tempered") f.weights.scheme = Scheme::tempered(exponent);
  else fail("unknown scheme '" + sch[1] + "'");
  next("log_base");
  f.diagnostics.kappa = parse_stat(next("kappa").at(1));
  f.diagnostics.score_lr = parse_stat(next("score_lr").at(1));
  f.diagnostics.gram_condition = parse_stat(next("gram_condition").at(1));
  f.weighted.kappa = parse_stat(next("weighted_kappa").at(1));
  f.weighted.score_lr = parse_stat(next("weighted_score_lr").at(1));
  f.weighted.gram_condition = parse_stat(next("weighted_gram_condition").at(1));
  f.residual_rms = parse_stat(next("residual_rms").at(1));
  auto act = next("active");
  const auto k = text::parse_int(act.at(1));
  if (!k || static_cast<std::size_t>(*k) + 2 != act.size()) fail("malformed active line");
  for (std::size_t i = 2; i < act.size(); ++i) {
    const auto v = text::parse_int(act[i]);
    if (!v || *v < 0) fail("invalid active index");
    f.active_set.push_back(static_cast<std::size_t>(*v));
  }
  const auto n = text::parse_int(next("coefficients").at(1));
  if (!n || *n < 1) fail("invalid coefficient count");
  f.coefficients.resize(*n);
  for (long long i = 0; i < *n; ++i) f.coefficients(i) = parse_stat(next("c").at(1));
  next("end");
  return f;
}

}  // namespace ddpce::regression
