#include "ddpce/basis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ddpce/error.hpp"
#include "ddpce/text.hpp"

namespace ddpce::basis {
namespace {

std::size_t distinct_count(std::span<const double> samples) {
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

double mean_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / static_cast<double>(a.size());
}

void require_degree(std::span<const double> samples, int p) {
  if (samples.empty()) throw Error(ErrorKind::Config, "cannot build a basis from zero samples");
  if (p < 0) throw Error(ErrorKind::Config, "polynomial degree must be non-negative");
  const std::size_t distinct = distinct_count(samples);
  if (distinct < static_cast<std::size_t>(p) + 1) {
    throw Error(ErrorKind::RankDeficient,
                "samples have " + std::to_string(distinct) + " distinct values; degree " +
                    std::to_string(p) + " needs " + std::to_string(p + 1) +
                    " (achievable max degree " + std::to_string(distinct - 1) + ")");
  }
}

Eigen::VectorXd standardized(std::span<const double> samples, const Standardization& map) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) z(static_cast<Eigen::Index>(i)) = map(samples[i]);
  return z;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Eigen::VectorXd empirical_moments(std::span<const double> samples, int max_order) {
  if (samples.empty()) throw Error(ErrorKind::Config, "moments need at least one sample");
  if (max_order < 0) throw Error(ErrorKind::Config, "moment order must be non-negative");
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(max_order + 1);
  for (double x : samples) {
    double power = 1.0;
    for (int r = 1; r <= max_order; ++r) {
      power *= x;
      mu(r) += power;
    }
  }
  mu /= static_cast<double>(samples.size());
  mu(0) = 1.0;
  return mu;
}

Standardization Standardization::fit(std::span<const double> samples) {
  const double m = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= m;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= m;
  const double sd = std::sqrt(var);
  return {mean, sd > 0.0 ? sd : 1.0};
}

UnivariateBasis::UnivariateBasis(Standardization map, Eigen::MatrixXd standardized_coeffs,
                                 Eigen::VectorXd source_moments, double lo, double hi)
    : map_(map), coeffs_(std::move(standardized_coeffs)), moments_(std::move(source_moments)),
      lo_(lo), hi_(hi) {
  if (coeffs_.rows() < 1 || coeffs_.rows() != coeffs_.cols())
    throw Error(ErrorKind::Config, "univariate coefficient table must be square and non-empty");
  if (!(map_.scale > 0.0)) throw Error(ErrorKind::Config, "standardization scale must be positive");
}

Eigen::MatrixXd UnivariateBasis::monomial_coefficients() const {
  const int p = degree();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (int row = 0; row <= p; ++row) {
    for (int k = 0; k <= row; ++k) {
      const double a = coeffs_(row, k) / std::pow(map_.scale, k);
      for (int r = 0; r <= k; ++r) {
        out(row, r) += a * binomial(k, r) * std::pow(-map_.shift, k - r);
      }
    }
  }
  return out;
}

double UnivariateBasis::value(int k, double x) const {
  const double z = map_(x);
  double acc = 0.0;
  for (int r = k; r >= 0; --r) acc = acc * z + coeffs_(k, r);
  return acc;
}

void UnivariateBasis::evaluate(double x, std::span<double> out) const {
  const double z = map_(x);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double acc = 0.0;
    for (int r = static_cast<int>(k); r >= 0; --r) acc = acc * z + coeffs_(static_cast<Eigen::Index>(k), r);
    out[k] = acc;
  }
}

UnivariateBasis build_univariate(std::span<const double> samples, int p) {
  require_degree(samples, p);
  const auto map = Standardization::fit(samples);
  const Eigen::VectorXd z = standardized(samples, map);
  const Eigen::Index m = z.size();

  Eigen::MatrixXd q(m, p + 1);
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(p + 1, p + 1);
  q.col(0).setOnes();
  coeffs(0, 0) = 1.0;

  for (int k = 1; k <= p; ++k) {
    Eigen::VectorXd v = z.cwiseProduct(q.col(k - 1));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
    c.segment(1, k) = coeffs.row(k - 1).head(k).transpose();
    const double start_norm = std::sqrt(mean_dot(v, v));
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const double h = mean_dot(v, q.col(j));
        v -= h * q.col(j);
        c -= h * coeffs.row(j).transpose();
      }
    }
    const double norm = std::sqrt(mean_dot(v, v));
    if (!(norm > 1e-12 * start_norm)) {
      throw Error(ErrorKind::RankDeficient,
                  "empirical Gram of monomials is numerically singular at degree " +
                      std::to_string(k) + " (achievable max degree " + std::to_string(k - 1) + ")");
    }
    q.col(k) = v / norm;
    coeffs.row(k) = (c / norm).transpose();
  }

  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  return UnivariateBasis(map, std::move(coeffs), empirical_moments(samples, 2 * p), *lo, *hi);
}

Eigen::MatrixXd stieltjes_coefficients(std::span<const double> samples, int p) {
  require_degree(samples, p);
  const auto map = Standardization::fit(samples);
  const Eigen::VectorXd z = standardized(samples, map);
  const Eigen::VectorXd mu = empirical_moments(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), 2 * p + 1);

  // <a, b> under the moment functional; a, b are coefficient vectors in z.
  auto inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < a.size(); ++r) {
      if (a(r) == 0.0) continue;
      for (Eigen::Index t = 0; t < b.size(); ++t) s += a(r) * b(t) * mu(r + t);
    }
    return s;
  };
  auto times_z = [](const Eigen::VectorXd& a) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());
    out.tail(a.size() - 1) = a.head(a.size() - 1);
    return out;
  };

  const Eigen::Index n = p + 1;
  std::vector<Eigen::VectorXd> monic;
  std::vector<double> norms;
  monic.push_back(Eigen::VectorXd::Unit(n, 0));
  norms.push_back(inner(monic[0], monic[0]));
  for (int k = 0; k < p; ++k) {
    const Eigen::VectorXd zk = times_z(monic[k]);
    const double a = inner(zk, monic[k]) / norms[k];
    Eigen::VectorXd next = zk - a * monic[k];
    if (k > 0) next -= (norms[k] / norms[k - 1]) * monic[k - 1];
    const double nn = inner(next, next);
    if (!(nn > 0.0)) {
      throw Error(ErrorKind::RankDeficient,
                  "moment recurrence broke down at degree " + std::to_string(k + 1));
    }
    monic.push_back(next);
    norms.push_back(nn);
  }

  Eigen::MatrixXd out(n, n);
  for (Eigen::Index k = 0; k < n; ++k) out.row(k) = (monic[k] / std::sqrt(norms[k])).transpose();
  return out;
}

std::size_t total_degree_count(std::size_t d, int p) {
  // C(d+p, p) built incrementally; every partial product is itself a binomial.
  std::size_t n = 1;
  for (int i = 1; i <= p; ++i) {
    const std::size_t num = d + static_cast<std::size_t>(i);
    if (n > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    n = n * num / static_cast<std::size_t>(i);
  }
  return n;
}

namespace {

void enumerate_degree(std::vector<int>& cur, std::size_t pos, int remaining,
                      std::vector<std::vector<int>>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    enumerate_degree(cur, pos + 1, remaining - v, out);
  }
}

}  // namespace

MultiIndexSet build_multi_index(std::size_t d, int p, std::size_t max_terms) {
  if (d < 1) throw Error(ErrorKind::Config, "multi-index set needs d >= 1");
  if (p < 0) throw Error(ErrorKind::Config, "total degree must be non-negative");
  const std::size_t n = total_degree_count(d, p);
  if (n > max_terms) {
    throw Error(ErrorKind::BasisTooLarge,
                "basis too large: N = " +
                    (n == std::numeric_limits<std::size_t>::max() ? std::string("overflow")
                                                                  : std::to_string(n)) +
                    " exceeds cap " + std::to_string(max_terms));
  }
  MultiIndexSet set{d, p, {}};
  set.indices.reserve(n);
  std::vector<int> cur(d, 0);
  for (int deg = 0; deg <= p; ++deg) enumerate_degree(cur, 0, deg, set.indices);
  return set;
}

MultivariateBasis::MultivariateBasis(std::vector<UnivariateBasis> dims, MultiIndexSet index)
    : dims_(std::move(dims)), index_(std::move(index)) {
  if (dims_.empty() || index_.dim != dims_.size())
    throw Error(ErrorKind::Config, "multi-index dimension does not match the univariate bases");
  for (const auto& nu : index_.indices) {
    if (nu.size() != dims_.size()) throw Error(ErrorKind::Config, "multi-index of wrong length");
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (nu[j] < 0 || nu[j] > dims_[j].degree())
        throw Error(ErrorKind::Config, "multi-index component " + std::to_string(nu[j]) +
                                           " exceeds degree of dimension " + std::to_string(j + 1));
    }
  }
  offsets_.resize(dims_.size());
  std::size_t off = 0;
  for (std::size_t j = 0; j < dims_.size(); ++j) {
    offsets_[j] = off;
    off += static_cast<std::size_t>(dims_[j].degree()) + 1;
  }
}

std::size_t MultivariateBasis::scratch_size() const {
  return offsets_.back() + static_cast<std::size_t>(dims_.back().degree()) + 1;
}

void MultivariateBasis::evaluate(std::span<const double> x, std::span<double> out,
                                 std::span<double> scratch) const {
  for (std::size_t j = 0; j < dims_.size(); ++j) {
    dims_[j].evaluate(x[j], scratch.subspan(offsets_[j], static_cast<std::size_t>(dims_[j].degree()) + 1));
  }
  for (std::size_t t = 0; t < index_.indices.size(); ++t) {
    const auto& nu = index_.indices[t];
    double v = 1.0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (nu[j] != 0) v *= scratch[offsets_[j] + static_cast<std::size_t>(nu[j])];
    }
    out[t] = v;
  }
}

Eigen::VectorXd MultivariateBasis::evaluate(std::span<const double> x) const {
  if (x.size() != dim())
    throw Error(ErrorKind::Config, "point has " + std::to_string(x.size()) + " coordinates, basis expects " +
                                       std::to_string(dim()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  std::vector<double> scratch(scratch_size());
  evaluate(x, std::span<double>(out.data(), size()), scratch);
  return out;
}

bool MultivariateBasis::in_training_box(std::span<const double> x) const {
  for (std::size_t j = 0; j < dims_.size(); ++j) {
    if (x[j] < dims_[j].lo() || x[j] > dims_[j].hi()) return false;
  }
  return true;
}

MultivariateBasis build_multivariate(const sampling::SampleSet& samples, int p, std::size_t max_terms) {
  auto index = build_multi_index(samples.dim(), p, max_terms);
  std::vector<UnivariateBasis> dims;
  dims.reserve(samples.dim());
  for (std::size_t j = 0; j < samples.dim(); ++j) {
    const auto col = samples.x().col(static_cast<Eigen::Index>(j));
    std::vector<double> values(col.begin(), col.end());
    try {
      dims.push_back(build_univariate(values, p));
    } catch (const Error& e) {
      throw Error(e.kind(), "input dimension " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  return MultivariateBasis(std::move(dims), std::move(index));
}

// Serialization. Line-oriented, whitespace separated, doubles at 17 digits:
//   ddpce-basis 1
//   dims D
//   dim J degree P shift S scale C lo L hi H
//   moments mu_0 .. mu_2P
//   coeffs K a_0 .. a_K          (K = 0..P, powers of the standardized z)
//   terms N total_degree P
//   nu n_1 .. n_D                (N lines, canonical order)
//   end

void write_basis(const MultivariateBasis& basis, std::ostream& os) {
  using text::format_double;
  os << "ddpce-basis 1\n";
  os << "dims " << basis.dim() << '\n';
  for (std::size_t j = 0; j < basis.dim(); ++j) {
    const auto& u = basis.dims()[j];
    os << "dim " << (j + 1) << " degree " << u.degree() << " shift "
       << format_double(u.standardization().shift) << " scale "
       << format_double(u.standardization().scale) << " lo " << format_double(u.lo()) << " hi "
       << format_double(u.hi()) << '\n';
    os << "moments";
    for (double m : u.source_moments()) os << ' ' << format_double(m);
    os << '\n';
    for (int k = 0; k <= u.degree(); ++k) {
      os << "coeffs " << k;
      for (int r = 0; r <= k; ++r) os << ' ' << format_double(u.standardized_coefficients()(k, r));
      os << '\n';
    }
  }
  os << "terms " << basis.size() << " total_degree " << basis.index().total_degree << '\n';
  for (const auto& nu : basis.index().indices) {
    os << "nu";
    for (int v : nu) os << ' ' << v;
    os << '\n';
  }
  os << "end\n";
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::vector<std::string> next(std::string_view keyword) {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      if (!text::trim(line).empty()) break;
      line.clear();
    }
    if (line.empty()) fail("unexpected end of input, expected '" + std::string(keyword) + "'");
    std::vector<std::string> tok;
    for (auto t : text::split_ws(text::trim(line))) tok.emplace_back(t);
    if (tok.front() != keyword) fail("expected '" + std::string(keyword) + "', found '" + tok.front() + "'");
    return tok;
  }

  double number(const std::string& s) const {
    auto v = text::parse_finite(s);
    if (!v) fail("invalid number '" + s + "'");
    return *v;
  }
  long long integer(const std::string& s) const {
    auto v = text::parse_int(s);
    if (!v) fail("invalid integer '" + s + "'");
    return *v;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, "line " + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::istream& is_;
  std::size_t lineno_ = 0;
};

}  // namespace

MultivariateBasis read_basis(std::istream& is) {
  LineReader in(is);
  auto head = in.next("ddpce-basis");
  if (head.size() != 2 || head[1] != "1") in.fail("unsupported basis format version");
  auto dims_line = in.next("dims");
  if (dims_line.size() != 2) in.fail("malformed dims line");
  const auto d = in.integer(dims_line[1]);
  if (d < 1) in.fail("dims must be positive");

  std::vector<UnivariateBasis> dims;
  for (long long j = 0; j < d; ++j) {
    auto t = in.next("dim");
    if (t.size() != 12 || t[2] != "degree" || t[4] != "shift" || t[6] != "scale" || t[8] != "lo" ||
        t[10] != "hi")
      in.fail("malformed dim line");
    const auto p = in.integer(t[3]);
    if (p < 0) in.fail("negative degree");
    Standardization map{in.number(t[5]), in.number(t[7])};
    const double lo = in.number(t[9]);
    const double hi = in.number(t[11]);
    auto mt = in.next("moments");
    Eigen::VectorXd moments(static_cast<Eigen::Index>(mt.size() - 1));
    for (std::size_t r = 1; r < mt.size(); ++r) moments(static_cast<Eigen::Index>(r - 1)) = in.number(mt[r]);
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (long long k = 0; k <= p; ++k) {
      auto ct = in.next("coeffs");
      if (static_cast<long long>(ct.size()) != k + 3 || in.integer(ct[1]) != k) in.fail("malformed coeffs line");
      for (long long r = 0; r <= k; ++r) coeffs(k, r) = in.number(ct[static_cast<std::size_t>(r + 2)]);
    }
    dims.emplace_back(map, std::move(coeffs), std::move(moments), lo, hi);
  }

  auto terms = in.next("terms");
  if (terms.size() != 4 || terms[2] != "total_degree") in.fail("malformed terms line");
  const auto n = in.integer(terms[1]);
  MultiIndexSet index{static_cast<std::size_t>(d), static_cast<int>(in.integer(terms[3])), {}};
  for (long long t = 0; t < n; ++t) {
    auto nt = in.next("nu");
    if (static_cast<long long>(nt.size()) != d + 1) in.fail("malformed nu line");
    std::vector<int> nu;
    for (std::size_t j = 1; j < nt.size(); ++j) nu.push_back(static_cast<int>(in.integer(nt[j])));
    index.indices.push_back(std::move(nu));
  }
  in.next("end");
  return MultivariateBasis(std::move(dims), std::move(index));
}

void save_basis(const MultivariateBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write basis file " + path.string());
  write_basis(basis, out);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

MultivariateBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open basis file " + path.string());
  return read_basis(in);
}

}  // namespace ddpce::basis
