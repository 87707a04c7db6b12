#include "baryopt/objectives.hpp"

#include <cmath>
#include <memory>
#include <thread>

#include "baryopt/rng.hpp"

namespace baryopt {
namespace {

double square(double v) { return v * v; }

double canoe_hull(const Vec& x) {
  static const Vec c{30.0, 40.0};
  static const Vec d{-30.0, -40.0};
  const double dc = square(x[0] - c[0]) + square(x[1] - c[1]);
  const double dd = square(x[0] - d[0]) + square(x[1] - d[1]);
  return std::max(dc, dd);
}

}  // namespace

Objective make_rosenbrock() {
  Objective o;
  o.name = "rosenbrock";
  o.dimension = 2;
  o.eval = [](const Vec& x) {
    require_dimension(x, 2, "rosenbrock");
    return 100.0 * square(x[0] * x[0] - x[1]) + square(1.0 - x[0]);
  };
  o.known_minimizer = Vec{1.0, 1.0};
  o.known_minimum = 0.0;
  return o;
}

Objective make_perturbed_quadratic() {
  Objective o;
  o.name = "perturbed_quadratic";
  o.dimension = 2;
  o.eval = [](const Vec& v) {
    require_dimension(v, 2, "perturbed_quadratic");
    const double x = v[0], y = v[1];
    return 10.0 * x * x * (1.0 + 0.75 * std::cos(70.0 * x) / 12.0) +
           square(std::cos(100.0 * x)) / 24.0 +
           2.0 * y * y * (1.0 + 0.75 * std::cos(70.0 * y) / 12.0) +
           square(std::cos(100.0 * y)) / 24.0 + 4.0 * x * y;
  };
  return o;
}

Objective make_canoe(bool verbatim_sign) {
  Objective o;
  o.name = verbatim_sign ? "canoe_verbatim" : "canoe";
  o.dimension = 2;
  if (verbatim_sign) {
    o.eval = [](const Vec& x) {
      require_dimension(x, 2, "canoe");
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return (1.0 - std::exp(r2)) * canoe_hull(x);
    };
  } else {
    o.eval = [](const Vec& x) {
      require_dimension(x, 2, "canoe");
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return (1.0 - std::exp(-r2)) * canoe_hull(x);
    };
    o.known_minimizer = Vec{0.0, 0.0};
    o.known_minimum = 0.0;
  }
  return o;
}

Objective make_quadratic(Matrix H, Vec x0) {
  if (H.rows() != H.cols() || H.rows() != x0.size())
    throw std::domain_error("make_quadratic: dimension mismatch");
  if (!H.is_symmetric())
    throw std::domain_error("make_quadratic: H must be symmetric");
  auto shared_H = std::make_shared<Matrix>(std::move(H));
  auto shared_x0 = std::make_shared<Vec>(std::move(x0));

  Objective o;
  o.name = "quadratic";
  o.dimension = shared_x0->size();
  o.eval = [shared_H, shared_x0](const Vec& x) {
    const Vec d = x - *shared_x0;
    return 0.5 * dot(d, shared_H->apply(d));
  };
  o.gradient = [shared_H, shared_x0](const Vec& x) {
    return shared_H->apply(x - *shared_x0);
  };
  o.hessian = [shared_H](const Vec&) { return *shared_H; };
  o.known_minimizer = *shared_x0;  // minimum only if H is PSD; callers know
  o.known_minimum = 0.0;
  return o;
}

Objective make_objective(const std::string& name, std::size_t dim) {
  if (name == "rosenbrock") return make_rosenbrock();
  if (name == "perturbed_quadratic") return make_perturbed_quadratic();
  if (name == "canoe") return make_canoe();
  if (name == "quadratic")
    return make_quadratic(Matrix::identity(dim), Vec(dim, 0.0));
  throw std::invalid_argument("unknown objective \"" + name +
                              "\" (expected rosenbrock | perturbed_quadratic "
                              "| canoe | quadratic)");
}

Objective with_noise(Objective obj, const NoiseModel& noise) {
  if (noise.sigma_w < 0.0)
    throw std::domain_error("with_noise: sigma_w must be nonnegative");
  if (noise.sigma_w == 0.0) return obj;

  auto stream = std::make_shared<GaussianStream>(noise.seed);
  Objective o = obj;
  o.name = obj.name + "+noise";
  o.noisy = true;
  o.eval = [inner = obj.eval, stream, sw = noise.sigma_w](const Vec& x) {
    return inner(x) + sw * stream->normal();
  };
  // Noise invalidates analytic derivatives of the *observed* oracle.
  o.gradient = nullptr;
  o.hessian = nullptr;
  return o;
}

std::vector<double> batch_evaluate(const Objective& obj,
                                   const std::vector<Vec>& points) {
  if (obj.noisy)
    throw std::domain_error(
        "batch_evaluate: noisy objectives consume a sequential draw stream "
        "and must be evaluated one query at a time");
  std::vector<double> out(points.size());
  if (points.empty()) return out;

  const std::size_t workers =
      std::min<std::size_t>(points.size(),
                            std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, 0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < points.size(); i += workers) {
        try {
          out[i] = obj.eval(points[i]);
        } catch (...) {
          if (!errors[w]) {
            errors[w] = std::current_exception();
            error_index[w] = i;
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  // Report the failure with the smallest point index, deterministically.
  std::size_t first = points.size();
  std::exception_ptr what;
  for (std::size_t w = 0; w < workers; ++w)
    if (errors[w] && error_index[w] < first) {
      first = error_index[w];
      what = errors[w];
    }
  if (what) {
    try {
      std::rethrow_exception(what);
    } catch (const std::exception& e) {
      throw BatchEvaluationError(first, e.what());
    }
  }
  return out;
}

}  // namespace baryopt
