// Serial vs OpenMP timings for the row kernels. Usage: ddpce_bench [rows] [degree]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "ddpce/basis.hpp"
#include "ddpce/kernels.hpp"
#include "ddpce/models.hpp"
#include "ddpce/regression.hpp"
#include "ddpce/sampling.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-16s %10.2f %10.2f %8.2fx  %s\n", name, serial_ms, parallel_ms, serial_ms / parallel_ms,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ddpce;
  const std::size_t rows = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200000;
  const int degree = argc > 2 ? std::atoi(argv[2]) : 4;

  sampling::InputSpec spec{{sampling::Uniform{0.8, 1.2}, sampling::Uniform{0.0, 23.0}, sampling::Uniform{2.0, 8.0}}};
  const auto train = sampling::draw_samples(spec, 2000, 1);
  const auto points = sampling::draw_samples(spec, rows, 2);
  const auto b = basis::build_multivariate(train, degree);
  const auto dispatch = models::DispatchConfig::illustrative();
  const kernels::RowFunction truth = [&](std::span<const double> x) {
    return models::eval_dispatch(dispatch, x).total_cost;
  };

  std::printf("rows %zu  degree %d  N %zu  threads %d\n", rows, degree, b.size(), kernels::max_threads());
  std::printf("%-16s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  Eigen::MatrixXd ds, dp;
  const double t_ds = best_of(3, [&] { ds = kernels::serial::assemble_design(b, points.x()); });
  const double t_dp = best_of(3, [&] { dp = kernels::parallel::assemble_design(b, points.x()); });
  report("assemble_design", t_ds, t_dp, ds == dp);

  const regression::DesignMatrix design{dp};
  Eigen::LLT<Eigen::MatrixXd> llt(regression::gram(design));
  const Eigen::MatrixXd lower = llt.matrixL();
  Eigen::VectorXd ks, kp;
  const double t_ks = best_of(3, [&] { ks = kernels::serial::leverage(dp, lower); });
  const double t_kp = best_of(3, [&] { kp = kernels::parallel::leverage(dp, lower); });
  report("leverage", t_ks, t_kp, ks == kp);

  const Eigen::VectorXd coeffs = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(b.size()), 1.0, -1.0);
  kernels::Predictions ps, pp;
  const double t_ps = best_of(3, [&] { ps = kernels::serial::predict(b, coeffs, points.x()); });
  const double t_pp = best_of(3, [&] { pp = kernels::parallel::predict(b, coeffs, points.x()); });
  report("predict", t_ps, t_pp, ps.values == pp.values && ps.extrapolated == pp.extrapolated);

  Eigen::VectorXd ys, yp;
  const double t_ys = best_of(3, [&] { ys = kernels::serial::evaluate_rows(truth, points.x()); });
  const double t_yp = best_of(3, [&] { yp = kernels::parallel::evaluate_rows(truth, points.x()); });
  report("dispatch_truth", t_ys, t_yp, ys == yp);
  return 0;
}
