#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <memory>

#include "isingmc/experiment.hpp"
#include "isingmc/gibbs.hpp"
#include "isingmc/io.hpp"
#include "isingmc/logsumexp.hpp"
#include "isingmc/mc_objective.hpp"
#include "isingmc/oracle.hpp"
#include "isingmc/path.hpp"
#include "isingmc/pseudolikelihood.hpp"
#include "isingmc/solver.hpp"

namespace py = pybind11;
using namespace isingmc;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using SpinArray = py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>;

int dim_from_size(std::size_t p) {
  const int d = static_cast<int>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(p))) / 2.0));
  if (d < 2 || num_edges(d) != p) throw DimensionError("theta length " + std::to_string(p) + " is not d(d-1)/2");
  return d;
}

Theta to_theta(const DoubleArray& a) {
  if (a.ndim() != 1) throw DimensionError("theta must be one-dimensional");
  const auto p = static_cast<std::size_t>(a.size());
  return Theta(dim_from_size(p), std::vector<double>(a.data(), a.data() + p));
}

Theta to_theta(const DoubleArray& a, int d) {
  const auto t = to_theta(a);
  if (t.dim() != d) throw DimensionError("theta has dimension " + std::to_string(t.dim()) + ", expected " + std::to_string(d));
  return t;
}

Dataset to_dataset(const SpinArray& a) {
  if (a.ndim() != 2) throw DimensionError("data must be a two-dimensional array of +-1");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<int>(a.shape(1));
  return Dataset(d, n, std::vector<Spin>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> to_array(const Eigen::MatrixXd& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) view(i, j) = m(i, j);
  return out;
}

SolverOptions solver_options(std::size_t max_iters, double kkt_tol, bool active_set) {
  SolverOptions s;
  s.max_iters = max_iters;
  s.kkt_tol = kkt_tol;
  s.active_set = active_set;
  s.validate();
  return s;
}

SmoothFunction smooth_of(const McObjective& obj) {
  const int d = obj.dim();
  return {[&obj, d](std::span<const double> x) { return obj.value(Theta(d, {x.begin(), x.end()})); },
          [&obj, d](std::span<const double> x, std::vector<double>& g) {
            auto ev = obj.evaluate(Theta(d, {x.begin(), x.end()}));
            g = std::move(ev.gradient);
            return ev.value;
          }};
}

SmoothFunction smooth_of(const PlObjective& obj) {
  const int d = obj.dim();
  return {[&obj, d](std::span<const double> x) { return obj.value(Theta(d, {x.begin(), x.end()})); },
          [&obj, d](std::span<const double> x, std::vector<double>& g) {
            return obj.value_and_gradient(Theta(d, {x.begin(), x.end()}), g);
          }};
}

py::dict fit_dict(const FitResult& fit) {
  py::dict out;
  out["theta"] = to_array(fit.theta_hat);
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["kkt_violation"] = fit.kkt_violation;
  out["objective"] = fit.objective;
  return out;
}

py::list path_list(const PathResult& path) {
  py::list out;
  for (const auto& s : path.steps) {
    py::dict step;
    step["lambda"] = s.lambda;
    step["theta"] = to_array(s.theta.vector());
    step["psi"] = to_array(s.psi.vector());
    step["ess"] = s.ess;
    step["kkt_violation"] = s.kkt_violation;
    step["iterations"] = s.iterations;
    step["objective"] = s.objective;
    step["converged"] = s.converged;
    step["failed"] = s.failed;
    step["error"] = s.error;
    out.append(step);
  }
  return out;
}

class PyMcObjective {
 public:
  PyMcObjective(const SpinArray& data, std::optional<DoubleArray> psi, std::size_t m, std::optional<std::size_t> burn_in,
                std::uint64_t seed) {
    const auto ds = to_dataset(data);
    const int d = ds.dim();
    const Theta p = psi ? to_theta(*psi, d) : Theta(d);
    py::gil_scoped_release release;
    auto chain = std::make_shared<const MarkovSample>(
        run_chain(p, m, burn_in.value_or(default_burn_in(d)), std::nullopt, {seed, 0}, false));
    obj_ = std::make_unique<McObjective>(ds, std::move(chain));
  }

  int dim() const { return obj_->dim(); }
  std::size_t m() const { return obj_->sample().m; }
  py::array_t<double> psi() const { return to_array(obj_->psi().vector()); }
  py::array_t<double> data_mean() const { return to_array(obj_->data_mean()); }
  double value(const DoubleArray& theta) const { return obj_->value(to_theta(theta, dim())); }
  py::array_t<double> gradient(const DoubleArray& theta) const { return to_array(obj_->gradient(to_theta(theta, dim()))); }
  double ess(const DoubleArray& theta) const { return obj_->evaluate(to_theta(theta, dim()), false).ess; }
  py::array_t<double> hessian(const DoubleArray& theta) const { return to_array(obj_->hessian(to_theta(theta, dim()))); }

  py::dict fit(double lambda, std::optional<DoubleArray> init, std::size_t max_iters, double kkt_tol,
               bool active_set) const {
    const auto opts = solver_options(max_iters, kkt_tol, active_set);
    const Theta start = init ? to_theta(*init, dim()) : Theta(dim());
    FitResult fit;
    {
      py::gil_scoped_release release;
      fit = fista(smooth_of(*obj_), lambda, start.values(), opts);
    }
    auto out = fit_dict(fit);
    out["ess"] = obj_->evaluate(Theta(dim(), fit.theta_hat), false).ess;
    return out;
  }

 private:
  std::unique_ptr<McObjective> obj_;
};

py::dict chain_constants_dict(const ChainConstants& c) {
  py::dict out;
  out["kappa"] = c.kappa;
  out["beta1"] = c.beta1;
  out["beta2"] = c.beta2;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse Ising structure learning with MCMC Lasso";
  m.attr("__version__") = ISINGMC_VERSION;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<WeightUnderflowError>(m, "WeightUnderflowError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("num_edges", &num_edges, py::arg("d"));
  m.def(
      "edge_index", [](int r, int s, int d) { return edge_index(r, s, d).linear; }, py::arg("r"), py::arg("s"),
      py::arg("d"), "0-based linear position of the 1-based pair (r, s).");
  m.def(
      "edge_pair",
      [](std::size_t k, int d) {
        const auto e = edge_from_linear(k, d);
        return std::make_pair(e.r, e.s);
      },
      py::arg("k"), py::arg("d"), "1-based pair at linear position k.");

  m.def(
      "sample_dataset",
      [](const DoubleArray& theta, std::size_t n, std::size_t chain_len, std::uint64_t seed, unsigned threads) {
        const auto t = to_theta(theta);
        Dataset data;
        {
          py::gil_scoped_release release;
          data = sample_dataset(t, n, chain_len, {seed, 0}, threads);
        }
        SpinArray out({static_cast<py::ssize_t>(data.size()), static_cast<py::ssize_t>(data.dim())});
        std::copy(data.flat().begin(), data.flat().end(), out.mutable_data());
        return out;
      },
      py::arg("theta"), py::arg("n"), py::arg("chain_len") = 100000, py::arg("seed") = 1, py::arg("threads") = 1);

  py::class_<PyMcObjective>(m, "McObjective")
      .def(py::init<const SpinArray&, std::optional<DoubleArray>, std::size_t, std::optional<std::size_t>, std::uint64_t>(),
           py::arg("data"), py::arg("psi") = py::none(), py::arg("m") = 100000, py::arg("burn_in") = py::none(),
           py::arg("seed") = 1)
      .def_property_readonly("dim", &PyMcObjective::dim)
      .def_property_readonly("m", &PyMcObjective::m)
      .def_property_readonly("psi", &PyMcObjective::psi)
      .def_property_readonly("data_mean", &PyMcObjective::data_mean)
      .def("value", &PyMcObjective::value, py::arg("theta"))
      .def("gradient", &PyMcObjective::gradient, py::arg("theta"))
      .def("ess", &PyMcObjective::ess, py::arg("theta"))
      .def("hessian", &PyMcObjective::hessian, py::arg("theta"))
      .def("fit", &PyMcObjective::fit, py::arg("lam"), py::arg("init") = py::none(), py::arg("max_iters") = 5000,
           py::arg("kkt_tol") = 1e-6, py::arg("active_set") = false);

  m.def(
      "pl_value", [](const DoubleArray& theta, const SpinArray& data) { return pl_nll(to_theta(theta), to_dataset(data)); },
      py::arg("theta"), py::arg("data"));
  m.def(
      "pl_gradient",
      [](const DoubleArray& theta, const SpinArray& data) { return to_array(pl_grad(to_theta(theta), to_dataset(data))); },
      py::arg("theta"), py::arg("data"));
  m.def(
      "fit_pl",
      [](const SpinArray& data, double lambda, std::size_t max_iters, double kkt_tol, bool active_set) {
        const auto ds = to_dataset(data);
        const auto opts = solver_options(max_iters, kkt_tol, active_set);
        FitResult fit;
        {
          py::gil_scoped_release release;
          const PlObjective obj(ds);
          fit = fista(smooth_of(obj), lambda, Theta(ds.dim()).values(), opts);
        }
        return fit_dict(fit);
      },
      py::arg("data"), py::arg("lam"), py::arg("max_iters") = 5000, py::arg("kkt_tol") = 1e-6,
      py::arg("active_set") = false);

  m.def(
      "lambda_grid", [](const std::vector<double>& c1, int d, std::size_t n) { return lambda_grid(c1, d, n); },
      py::arg("c1"), py::arg("d"), py::arg("n"));
  m.def(
      "lambda_max", [](const SpinArray& data) { return pl_lambda_max(to_dataset(data)); }, py::arg("data"),
      "Smallest penalty with an all-zero pseudolikelihood fit.");
  m.def(
      "mc_path",
      [](const SpinArray& data, const std::vector<double>& lambdas, std::size_t m, std::optional<std::size_t> burn_in,
         std::uint64_t seed) {
        const auto ds = to_dataset(data);
        McPathOptions opts;
        opts.m = m;
        opts.burn_in = burn_in.value_or(default_burn_in(ds.dim()));
        PathResult path;
        {
          py::gil_scoped_release release;
          path = run_mc_path(ds, lambdas, opts, {seed, 0});
        }
        return path_list(path);
      },
      py::arg("data"), py::arg("lambdas"), py::arg("m") = 100000, py::arg("burn_in") = py::none(), py::arg("seed") = 1);
  m.def(
      "pl_path",
      [](const SpinArray& data, const std::vector<double>& lambdas) {
        const auto ds = to_dataset(data);
        PathResult path;
        {
          py::gil_scoped_release release;
          path = run_pl_path(ds, lambdas, SolverOptions{});
        }
        return path_list(path);
      },
      py::arg("data"), py::arg("lambdas"));

  m.def(
      "norming_constant", [](const DoubleArray& theta) { return norming_constant(to_theta(theta)); }, py::arg("theta"));
  m.def(
      "log_norming_constant", [](const DoubleArray& theta) { return log_norming_constant(to_theta(theta)); },
      py::arg("theta"));
  m.def(
      "exact_nll",
      [](const DoubleArray& theta, const SpinArray& data) {
        const auto r = exact_nll_grad_hess(to_theta(theta), to_dataset(data), false);
        return std::make_pair(r.value, to_array(r.gradient));
      },
      py::arg("theta"), py::arg("data"), "Exact negative log-likelihood and its gradient by enumeration.");
  m.def(
      "spectral_constants",
      [](const DoubleArray& psi, std::optional<std::vector<double>> q) {
        return chain_constants_dict(gibbs_spectral_constants(to_theta(psi), q));
      },
      py::arg("psi"), py::arg("q") = py::none());
  m.def(
      "importance_ratio_bound",
      [](const DoubleArray& theta_star, const DoubleArray& psi) {
        const auto t = to_theta(theta_star);
        return importance_ratio_bound(t, to_theta(psi, t.dim()));
      },
      py::arg("theta_star"), py::arg("psi"));
  m.def("theorem_alpha", &theorem_alpha, py::arg("xi"));
  m.def(
      "theorem_report",
      [](double xi, double epsilon, double n, double m, double num_params, double support_size, double F, double M,
         double beta1, double beta2, std::optional<double> lambda) {
        TheoremInputs in;
        in.xi = xi;
        in.epsilon = epsilon;
        in.n = n;
        in.m = m;
        in.num_params = num_params;
        in.support_size = support_size;
        in.F = F;
        in.M = M;
        in.beta1 = beta1;
        in.beta2 = beta2;
        in.lambda = lambda;
        const auto r = theorem_report(in);
        py::dict out;
        out["alpha"] = r.alpha;
        out["lambda_sample_term"] = r.lambda_sample_term;
        out["lambda_mc_term"] = r.lambda_mc_term;
        out["lambda"] = r.lambda_thm;
        out["R"] = r.R;
        out["n_required"] = r.n_required;
        out["m_required"] = r.m_required;
        out["ncond_ok"] = r.ncond_ok;
        out["mcond_ok"] = r.mcond_ok;
        return out;
      },
      py::arg("xi") = 2.0, py::arg("epsilon") = 0.1, py::arg("n") = 1.0, py::arg("m") = 1.0,
      py::arg("num_params") = 1.0, py::arg("support_size") = 1.0, py::arg("F") = 1.0, py::arg("M") = 1.0,
      py::arg("beta1") = 1.0, py::arg("beta2") = 1.0, py::arg("lam") = py::none());

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto cfg = experiment_config_from_json(nlohmann::json::parse(config_json));
        ResultTable table;
        {
          py::gil_scoped_release release;
          table = run_experiment(cfg);
        }
        return py::make_tuple(format_result_tsv(table.rows), format_records_tsv(table.records),
                              result_summary_json(cfg, table).dump());
      },
      py::arg("config_json"), "Returns (results_tsv, records_tsv, summary_json).");
}
