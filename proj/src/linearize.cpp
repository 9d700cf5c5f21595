#include "mixval/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "mixval/errors.hpp"

namespace mixval {

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

const std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

class BudgetExhausted {};

/// Objective in unit-box coordinates with evaluation accounting.
struct Objective {
    BlackBox& bb;
    const Box& box;
    const VectorXd& obs;
    long budget;
    long used = 0;
    double best = std::numeric_limits<double>::infinity();
    VectorXd best_u;

    double operator()(const VectorXd& u) {
        if (used >= budget) throw BudgetExhausted{};
        ++used;
        const VectorXd uc = u.cwiseMax(0.0).cwiseMin(1.0);
        const VectorXd K = box.lower + uc.cwiseProduct(box.width());
        const VectorXd r = obs - bb(K);
        if (r.size() != obs.size()) throw ModelError("black box output length differs from the observations");
        const double f = r.squaredNorm();
        const double outside = (u - uc).squaredNorm();
        const double value = f + outside * (1.0 + f);
        if (value < best) {
            best = value;
            best_u = uc;
        }
        return value;
    }
};

void nelder_mead(Objective& obj, const VectorXd& start, const NelderMeadOptions& o) {
    const Index q = start.size();
    std::vector<VectorXd> pts(static_cast<std::size_t>(q + 1), start);
    std::vector<double> vals(static_cast<std::size_t>(q + 1));
    for (Index j = 0; j < q; ++j) {
        auto& p = pts[static_cast<std::size_t>(j + 1)];
        p(j) += start(j) + o.initial_step <= 1.0 ? o.initial_step : -o.initial_step;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = obj(pts[i]);
    std::vector<std::size_t> order(pts.size());
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        double diameter = 0.0;
        for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
        const double spread = vals[worst] - vals[best];
        if (diameter < o.x_tolerance || spread <= o.f_tolerance * (std::abs(vals[best]) + 1e-300)) return;

        VectorXd centroid = VectorXd::Zero(q);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i != worst) centroid += pts[i];
        }
        centroid /= static_cast<double>(q);
        const VectorXd xr = centroid + (centroid - pts[worst]);
        const double fr = obj(xr);
        if (fr < vals[best]) {
            const VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = obj(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const VectorXd xc = outside ? VectorXd(centroid + 0.5 * (xr - centroid))
                                    : VectorXd(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = obj(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = obj(pts[i]);
        }
    }
}

nlohmann::json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd json_vec(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

OlsResult ols_reference(BlackBox& bb, const Box& box, const VectorXd& obs, const NelderMeadOptions& opts) {
    box.validate();
    if (obs.size() == 0) throw InvalidArgument("ols_reference needs observations");
    if (opts.restarts < 1) throw InvalidArgument("ols_reference needs at least one start");
    const Index q = box.dim();
    Objective obj{bb, box, obs, opts.max_evaluations, 0, std::numeric_limits<double>::infinity(), VectorXd()};
    OlsResult result;
    try {
        for (int s = 0; s < opts.restarts; ++s) {
            VectorXd start(q);
            for (Index j = 0; j < q; ++j) {
                start(j) = s == 0 ? 0.5 : radical_inverse(static_cast<std::uint64_t>(s), kPrimes[j % 16]);
            }
            nelder_mead(obj, start, opts);
            // polish from the best point found so far
            nelder_mead(obj, obj.best_u, opts);
            result.best_trace.push_back(obj.best);
        }
    } catch (const BudgetExhausted&) {
        result.budget_exhausted = true;
        result.best_trace.push_back(obj.best);
    }
    if (obj.best_u.size() == 0) throw ModelError("ols_reference: no objective evaluation succeeded");
    result.K_hat = box.clip(box.lower + obj.best_u.cwiseProduct(box.width()));
    result.objective = obj.best;
    result.evaluations = obj.used;
    return result;
}

VectorXd default_steps(const Box& box) { return 1e-4 * box.width(); }

MatrixXd finite_diff_jacobian(BlackBox& bb, const VectorXd& K, const Box& box, const VectorXd& h, int jobs) {
    box.validate();
    const Index q = box.dim();
    if (K.size() != q || h.size() != q) throw InvalidArgument("finite_diff_jacobian: dimension mismatch");
    if (!box.contains(K)) throw InvalidArgument("finite_diff_jacobian: K is outside the box");
    if (!(h.array() > 0.0).all()) throw InvalidArgument("finite_diff_jacobian: steps must be positive");

    std::vector<VectorXd> columns(static_cast<std::size_t>(q));
    auto column = [&](Index j) {
        double step = h(j);
        const double room_up = box.upper(j) - K(j);
        const double room_down = K(j) - box.lower(j);
        VectorXd e = VectorXd::Zero(q);
        if (room_up >= step && room_down >= step) {
            e(j) = step;
            columns[static_cast<std::size_t>(j)] = (bb(K + e) - bb(K - e)) / (2.0 * step);
            return;
        }
        const double sign = room_up >= room_down ? 1.0 : -1.0;
        step = std::min(step, 0.5 * std::max(room_up, room_down));
        e(j) = sign * step;
        const VectorXd base = bb(K);
        columns[static_cast<std::size_t>(j)] = (-3.0 * base + 4.0 * bb(K + e) - bb(K + 2.0 * e)) / (2.0 * sign * step);
    };
    if (jobs > 1 && bb.concurrent() && q > 1) {
        std::vector<std::thread> pool;
        std::atomic<Index> next{0};
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(q)); ++t) {
            pool.emplace_back([&] {
                for (Index j = next++; j < q; j = next++) column(j);
            });
        }
        for (auto& th : pool) th.join();
    } else {
        for (Index j = 0; j < q; ++j) column(j);
    }
    MatrixXd J(columns.front().size(), q);
    for (Index j = 0; j < q; ++j) {
        if (columns[static_cast<std::size_t>(j)].size() != J.rows()) throw ModelError("black box output length changed");
        J.col(j) = columns[static_cast<std::size_t>(j)];
    }
    return J;
}

LinearSurrogate build_surrogate(BlackBox& bb, const Box& box, const VectorXd& obs, const NelderMeadOptions& opts,
                                double step_fraction, int jobs) {
    const OlsResult ols = ols_reference(bb, box, obs, opts);
    LinearSurrogate s;
    s.K_hat = ols.K_hat;
    s.box = box;
    s.objective = ols.objective;
    s.budget_exhausted = ols.budget_exhausted;
    s.f0 = bb(s.K_hat);
    if (s.f0.size() != obs.size()) throw ModelError("black box output length differs from the observations");
    s.J = finite_diff_jacobian(bb, s.K_hat, box, step_fraction * box.width(), jobs);
    s.evaluations = bb.evaluations();
    return s;
}

nlohmann::json surrogate_to_json(const LinearSurrogate& s) {
    nlohmann::json j;
    j["K_hat"] = vec_json(s.K_hat);
    j["f0"] = vec_json(s.f0);
    j["jacobian"] = nlohmann::json::array();
    for (Index r = 0; r < s.J.rows(); ++r) j["jacobian"].push_back(vec_json(s.J.row(r).transpose()));
    j["box_lower"] = vec_json(s.box.lower);
    j["box_upper"] = vec_json(s.box.upper);
    j["objective"] = s.objective;
    j["evaluations"] = s.evaluations;
    j["budget_exhausted"] = s.budget_exhausted;
    return j;
}

LinearSurrogate surrogate_from_json(const nlohmann::json& j) {
    LinearSurrogate s;
    s.K_hat = json_vec(j.at("K_hat"));
    s.f0 = json_vec(j.at("f0"));
    const auto& rows = j.at("jacobian");
    s.J.resize(static_cast<Index>(rows.size()), s.K_hat.size());
    for (std::size_t r = 0; r < rows.size(); ++r) s.J.row(static_cast<Index>(r)) = json_vec(rows[r]).transpose();
    s.box = {json_vec(j.at("box_lower")), json_vec(j.at("box_upper"))};
    s.objective = j.at("objective").get<double>();
    s.evaluations = j.at("evaluations").get<long>();
    s.budget_exhausted = j.at("budget_exhausted").get<bool>();
    return s;
}

LinearizedProblem to_linear_code(const LinearSurrogate& s, const std::vector<Index>& fit_indices, const VectorXd& obs) {
    if (fit_indices.empty()) throw InvalidArgument("to_linear_code needs at least one parameter to fit");
    if (obs.size() != s.f0.size()) throw InvalidArgument("observations and surrogate differ in length");
    std::vector<Index> sorted = fit_indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InvalidArgument("repeated fit index");
    MatrixXd Jfit(s.J.rows(), static_cast<Index>(fit_indices.size()));
    VectorXd Kfit(static_cast<Index>(fit_indices.size()));
    for (std::size_t c = 0; c < fit_indices.size(); ++c) {
        const Index j = fit_indices[c];
        if (j < 0 || j >= s.J.cols()) throw InvalidArgument("fit index " + std::to_string(j + 1) + " out of range");
        Jfit.col(static_cast<Index>(c)) = s.J.col(j);
        Kfit(static_cast<Index>(c)) = s.K_hat(j);
    }
    const auto dependent = dependent_columns(Jfit);
    if (!dependent.empty()) {
        std::string names;
        for (Index d : dependent) names += (names.empty() ? "K" : ", K") + std::to_string(fit_indices[static_cast<std::size_t>(d)] + 1);
        throw ModelError("selected Jacobian columns are linearly dependent: " + names);
    }
    return {LinearCode::tabulated(Jfit), obs - s.f0 + Jfit * Kfit};
}

}  // namespace mixval
