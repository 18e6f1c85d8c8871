#include "oscgeo/qmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oscgeo/errors.hpp"

namespace oscgeo::qmle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spread(const std::vector<Eigen::VectorXd>& simplex) {
    double s = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
        s = std::max(s, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    }
    return s;
}

}  // namespace

ParamVector transform_params(const npf::ModelParams& params) {
    params.validate();
    if (!(params.sigma1 > 0.0) || !(params.sigma2 > 0.0) || !(params.sigma_eps > 0.0)) {
        throw std::invalid_argument("transform_params: sigmas must be strictly positive");
    }
    ParamVector v;
    v << std::log(params.sigma1), std::log(params.sigma2), std::log(params.sigma_eps), params.theta[0],
        params.theta[1], params.theta[2], params.theta[3];
    return v;
}

npf::ModelParams untransform_params(const ParamVector& v) {
    npf::ModelParams p;
    p.sigma1 = std::exp(v(0));
    p.sigma2 = std::exp(v(1));
    p.sigma_eps = std::exp(v(2));
    p.theta = {v(3), v(4), v(5), v(6)};
    return p;
}

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, double scale, std::size_t max_iter, double tol,
                          const std::function<void(std::size_t, double)>& on_iteration) {
    const auto n = static_cast<std::size_t>(start.size());
    SimplexResult result;

    auto eval = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        const double f = objective(x);
        return std::isfinite(f) ? f : kInf;
    };

    if (max_iter == 0) {
        result.x = start;
        result.value = eval(start);
        return result;
    }

    std::vector<Eigen::VectorXd> xs(n + 1, start);
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1](static_cast<Eigen::Index>(i)) += scale;
    for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(xs[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        std::vector<Eigen::VectorXd> nx;
        std::vector<double> nf;
        for (std::size_t i : order) {
            nx.push_back(xs[i]);
            nf.push_back(fs[i]);
        }
        xs = std::move(nx);
        fs = std::move(nf);
    };
    sort_simplex();

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        if (spread(xs) < tol) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(start.size());
        for (std::size_t i = 0; i < n; ++i) centroid += xs[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd& worst = xs[n];
        const Eigen::VectorXd xr = centroid + (centroid - worst);
        const double fr = eval(xr);

        if (fr < fs[0]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
            const double fe = eval(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            const bool outside = fr < fs[n];
            const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                               : Eigen::VectorXd(centroid + 0.5 * (worst - centroid));
            const double fc = eval(xc);
            if (fc < (outside ? fr : fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                    fs[i] = eval(xs[i]);
                }
            }
        }
        sort_simplex();
        if (on_iteration) on_iteration(iter + 1, fs[0]);
    }
    if (!result.converged && spread(xs) < tol) result.converged = true;

    result.x = xs[0];
    result.value = fs[0];
    result.iterations = iter;
    return result;
}

FitReport fit(const npf::ObservationSeries& series, const npf::ModelParams& init, const FitOptions& options) {
    series.validate();
    if (series.size() < kMinFitLength) {
        throw std::invalid_argument("fit: series must have at least " + std::to_string(kMinFitLength) + " points");
    }
    if (!(options.tol > 0.0)) throw std::invalid_argument("fit: tol must be positive");
    if (!(options.simplex_scale > 0.0)) throw std::invalid_argument("fit: simplex_scale must be positive");

    auto make_init = options.init_state ? options.init_state : npf::default_initial_state;
    auto objective = [&](const Eigen::VectorXd& v) {
        const npf::ModelParams p = untransform_params(ParamVector(v));
        try {
            return -npf::log_likelihood(series, p, make_init(series, p));
        } catch (const NumericError&) {
            return kInf;
        } catch (const std::invalid_argument&) {
            return kInf;
        }
    };

    const ParamVector start = transform_params(init);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 0.5);

    FitReport report;
    SimplexResult best;
    best.value = kInf;
    bool have_best = false;
    const std::size_t starts = std::max<std::size_t>(options.n_starts, 1);
    for (std::size_t s = 0; s < starts; ++s) {
        Eigen::VectorXd x0 = start;
        if (s > 0) {
            for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += jitter(rng);
        }
        auto trace_cb = [&](std::size_t it, double f) {
            if (options.keep_trace) report.trace.emplace_back(report.iterations + it, -f);
        };
        SimplexResult r = nelder_mead(objective, x0, options.simplex_scale, options.max_iter, options.tol, trace_cb);
        report.iterations += r.iterations;
        report.evaluations += r.evaluations;
        if (!have_best || r.value < best.value) {
            best = std::move(r);
            have_best = true;
        }
    }

    if (!std::isfinite(best.value)) {
        throw FitError("fit: every objective evaluation was non-finite");
    }
    report.params = untransform_params(ParamVector(best.x));
    report.log_likelihood = -best.value;
    report.converged = best.converged;
    return report;
}

}  // namespace oscgeo::qmle
