#include "ddpce/sampling.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ddpce/error.hpp"
#include "ddpce/text.hpp"

namespace ddpce::sampling {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Lemire's nearly-divisionless bounded integer in [0, n).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double draw_one(const Distribution& dist, std::mt19937_64& rng) {
  return std::visit(
      overloaded{
          [&](const Uniform& u) {
            const double v = u.lo + (u.hi - u.lo) * uniform01(rng);
            return v < u.hi ? v : std::nextafter(u.hi, u.lo);
          },
          [&](const Normal& n) {
            // Box-Muller, cosine branch only.
            const double u1 = 1.0 - uniform01(rng);
            const double u2 = uniform01(rng);
            return n.mean + n.std * std::sqrt(-2.0 * std::log(u1)) *
                                std::cos(2.0 * std::numbers::pi * u2);
          },
          [&](const DiscreteUniform& d) { return d.values[bounded(rng, d.values.size())]; },
          [&](const Empirical& e) { return e.values[bounded(rng, e.values.size())]; },
      },
      dist);
}

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::Config, msg);
}

double need_number(std::string_view tok, std::string_view what) {
  auto v = text::parse_finite(tok);
  if (!v) config_error("invalid number '" + std::string(tok) + "' in " + std::string(what));
  return *v;
}

Empirical load_empirical(const std::filesystem::path& path, std::size_t column) {
  const SampleSet s = load_samples(path);
  Empirical e{path, column, {}};
  if (column >= 1 && column <= s.dim()) {
    const auto col = s.x().col(static_cast<Eigen::Index>(column - 1));
    e.values.assign(col.begin(), col.end());
  } else if (column == s.dim() + 1 && s.y()) {
    e.values.assign(s.y()->begin(), s.y()->end());
  } else {
    config_error("empirical column " + std::to_string(column) + " not present in " +
                 path.string());
  }
  return e;
}

}  // namespace

void InputSpec::validate() const {
  if (dims.empty()) config_error("input spec needs at least one dimension");
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const std::string where = "input dimension " + std::to_string(j + 1);
    std::visit(overloaded{
                   [&](const Uniform& u) {
                     if (!(std::isfinite(u.lo) && std::isfinite(u.hi) && u.lo < u.hi))
                       config_error(where + ": uniform requires finite lo < hi");
                   },
                   [&](const Normal& n) {
                     if (!(std::isfinite(n.mean) && std::isfinite(n.std) && n.std > 0))
                       config_error(where + ": normal requires std > 0");
                   },
                   [&](const DiscreteUniform& d) {
                     if (d.values.empty())
                       config_error(where + ": discrete value list is empty");
                     for (double v : d.values)
                       if (!std::isfinite(v)) config_error(where + ": non-finite discrete value");
                   },
                   [&](const Empirical& e) {
                     if (e.values.empty())
                       config_error(where + ": empirical source has no values");
                   },
               },
               dims[j]);
  }
}

Distribution parse_distribution(std::string_view textv) {
  const auto tok = text::split_ws(text::trim(textv));
  if (tok.empty()) config_error("empty distribution descriptor");
  const std::string_view kind = tok[0];
  const std::string what(textv);
  if (kind == "uniform" || kind == "normal") {
    if (tok.size() != 3) config_error("'" + what + "' expects two parameters");
    const double a = need_number(tok[1], what);
    const double b = need_number(tok[2], what);
    if (kind == "uniform") return Uniform{a, b};
    return Normal{a, b};
  }
  if (kind == "discrete") {
    DiscreteUniform d;
    for (std::size_t i = 1; i < tok.size(); ++i) d.values.push_back(need_number(tok[i], what));
    return d;
  }
  if (kind == "discrete_range") {
    if (tok.size() != 3) config_error("'" + what + "' expects two integer bounds");
    const auto a = text::parse_int(tok[1]);
    const auto b = text::parse_int(tok[2]);
    if (!a || !b || *a > *b) config_error("'" + what + "' needs integers A <= B");
    DiscreteUniform d;
    for (long long v = *a; v <= *b; ++v) d.values.push_back(static_cast<double>(v));
    return d;
  }
  if (kind == "empirical") {
    if (tok.size() < 2 || tok.size() > 3) config_error("'" + what + "' expects PATH [COLUMN]");
    std::size_t column = 1;
    if (tok.size() == 3) {
      const auto c = text::parse_int(tok[2]);
      if (!c || *c < 1) config_error("'" + what + "' column must be a positive integer");
      column = static_cast<std::size_t>(*c);
    }
    return load_empirical(std::filesystem::path(std::string(tok[1])), column);
  }
  config_error("unknown distribution '" + std::string(kind) + "'");
}

std::string describe(const Distribution& dist) {
  return std::visit(
      overloaded{
          [](const Uniform& u) {
            return "uniform " + text::format_double(u.lo) + " " + text::format_double(u.hi);
          },
          [](const Normal& n) {
            return "normal " + text::format_double(n.mean) + " " + text::format_double(n.std);
          },
          [](const DiscreteUniform& d) {
            std::string s = "discrete";
            for (double v : d.values) s += " " + text::format_double(v);
            return s;
          },
          [](const Empirical& e) {
            return "empirical " + e.path.string() + " " + std::to_string(e.column);
          },
      },
      dist);
}

SampleSet::SampleSet(Eigen::MatrixXd x, std::optional<Eigen::VectorXd> y,
                     std::optional<std::uint64_t> seed)
    : x_(std::move(x)), y_(std::move(y)), seed_(seed) {
  if (x_.rows() < 1 || x_.cols() < 1)
    throw Error(ErrorKind::Config, "sample set needs at least one row and one column");
  if (!x_.allFinite()) throw Error(ErrorKind::Config, "sample set contains non-finite inputs");
  if (y_) {
    if (y_->size() != x_.rows())
      throw Error(ErrorKind::Config, "response length " + std::to_string(y_->size()) +
                                         " does not match sample count " +
                                         std::to_string(x_.rows()));
    if (!y_->allFinite()) throw Error(ErrorKind::Config, "sample set contains non-finite responses");
  }
}

SampleSet SampleSet::with_response(Eigen::VectorXd y) const {
  return SampleSet(x_, std::move(y), seed_);
}

std::uint64_t substream_seed(std::uint64_t seed, std::size_t dim) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(dim) + 1));
}

SampleSet draw_samples(const InputSpec& spec, std::size_t m, std::uint64_t seed) {
  spec.validate();
  if (m < 1) config_error("sample count must be at least 1");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(spec.dim()));
  for (std::size_t j = 0; j < spec.dim(); ++j) {
    std::mt19937_64 rng(substream_seed(seed, j));
    for (std::size_t i = 0; i < m; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = draw_one(spec.dims[j], rng);
    }
  }
  return SampleSet(std::move(x), std::nullopt, seed);
}

SampleSet load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open sample file " + path.string());
  const std::string file = path.string();
  auto parse_error = [&](std::size_t line, std::size_t col, const std::string& msg) {
    throw Error(ErrorKind::Parse,
                file + ": row " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  };

  std::string line;
  if (!std::getline(in, line)) parse_error(1, 1, "missing header");
  const auto header = text::split(text::trim(line), ',');
  std::size_t d = 0;
  bool has_y = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = text::trim(header[c]);
    if (name == "y" && c + 1 == header.size() && c > 0) {
      has_y = true;
    } else if (name == "x" + std::to_string(c + 1)) {
      ++d;
    } else {
      parse_error(1, c + 1, "unexpected header '" + std::string(name) + "'");
    }
  }
  const std::size_t width = header.size();

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(text::trim(line), ',');
    if (cells.size() != width)
      parse_error(lineno, std::min(cells.size(), width) + 1,
                  "expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = text::parse_finite(cells[c]);
      if (!v) parse_error(lineno, c + 1, "not a finite number: '" + std::string(cells[c]) + "'");
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) parse_error(lineno + 1, 1, "no data rows");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  std::optional<Eigen::VectorXd> y;
  if (has_y) y = Eigen::VectorXd(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * width + j];
    if (has_y) (*y)(static_cast<Eigen::Index>(i)) = values[i * width + d];
  }
  return SampleSet(std::move(x), std::move(y));
}

void save_samples(const SampleSet& samples, const std::filesystem::path& path) {
  std::ostringstream os;
  for (std::size_t j = 0; j < samples.dim(); ++j) os << (j ? "," : "") << "x" << (j + 1);
  if (samples.y()) os << ",y";
  os << '\n';
  for (Eigen::Index i = 0; i < samples.x().rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.x().cols(); ++j)
      os << (j ? "," : "") << text::format_double(samples.x()(i, j));
    if (samples.y()) os << ',' << text::format_double((*samples.y())(i));
    os << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write sample file " + path.string());
  out << os.str();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace ddpce::sampling
