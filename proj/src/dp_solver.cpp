#include "riskstop/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskstop/errors.hpp"
#include "riskstop/gauss_legendre.hpp"
#include "riskstop/parallel.hpp"

namespace riskstop {

PhiMode phi_mode_from_string(const std::string& name) {
    if (name == "consistent") return PhiMode::Consistent;
    if (name == "as_printed") return PhiMode::AsPrinted;
    throw std::invalid_argument("unknown mode '" + name + "' (consistent | as_printed)");
}

std::string to_string(PhiMode mode) {
    return mode == PhiMode::Consistent ? "consistent" : "as_printed";
}

double default_u_max(const ModelParams& params) {
    return (params.a + params.c / params.alpha) *
           std::exp(std::max(params.alpha, params.alpha1) * params.t0);
}

std::vector<std::string> validate_solver(const ModelParams& params, const SolverConfig& config) {
    std::vector<std::string> violations;
    const double required = default_u_max(params);
    if (config.u_max > 0.0 && config.u_max < required * (1.0 - 1e-12))
        violations.push_back("solver.u_max must be >= (a + c/alpha) e^{max(alpha,alpha1) t0} = " +
                             std::to_string(required));
    if (config.u_cells < 2) violations.push_back("solver.u_cells must be >= 2");
    if (config.t_cells < 1) violations.push_back("solver.t_cells must be >= 1");
    if (config.quad_order < 1 || config.quad_order > 64)
        violations.push_back("solver.quad_order must lie in [1, 64]");
    if (config.claim_panels < 1) violations.push_back("solver.claim_panels must be >= 1");
    if (config.s_panel_subdiv < 1) violations.push_back("solver.s_panel_subdiv must be >= 1");
    if (!(config.r_refine_tol > 0.0)) violations.push_back("solver.r_refine_tol must be > 0");
    if (!(config.fix_tol > 0.0)) violations.push_back("solver.fix_tol must be > 0");
    return violations;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t cells) {
    std::vector<double> nodes(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        nodes[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
    nodes.front() = lo;
    nodes.back() = hi;
    return nodes;
}

void append_tail(std::vector<double>& nodes, const std::vector<double>& more) {
    nodes.insert(nodes.end(), more.begin() + 1, more.end());
}

}  // namespace

Axis make_u_axis(const ModelParams& params, const SolverConfig& config) {
    const double required = default_u_max(params);
    const double u_max = config.u_max > 0.0 ? config.u_max : required;
    if (u_max < required * (1.0 - 1e-12))
        throw std::invalid_argument("make_u_axis: u_max below the reachable-capital bound");
    const std::size_t cells = config.u_cells;
    const double knee = params.reachable_capital_bound();
    if (cells < 12 || knee >= 0.98 * u_max) return Axis(linspace(0.0, u_max, cells));

    // Dense resolution where trajectories actually live, a coarse tail up to
    // u_max, and the initial capital pinned on a node.
    const std::size_t tail_cells = std::max<std::size_t>(4, cells / 8);
    const std::size_t dense_cells = cells - tail_cells;
    std::size_t below_a = static_cast<std::size_t>(
        std::llround(static_cast<double>(dense_cells) * params.a / knee));
    below_a = std::clamp<std::size_t>(below_a, 1, dense_cells - 1);
    std::vector<double> nodes = linspace(0.0, params.a, below_a);
    append_tail(nodes, linspace(params.a, knee, dense_cells - below_a));
    append_tail(nodes, linspace(knee, u_max, tail_cells));
    return Axis(std::move(nodes));
}

Axis make_t_axis(const ModelParams& params, const SolverConfig& config) {
    return Axis(linspace(0.0, params.t0, config.t_cells));
}

ValueGrid make_gamma0(const DpProblem& problem, const SolverConfig& config) {
    ValueGrid grid(make_u_axis(problem.params, config), make_t_axis(problem.params, config));
    for (std::size_t j = 0; j < grid.t_count(); ++j) {
        double* row = grid.t_row(j);
        for (std::size_t i = 0; i < grid.u_count(); ++i)
            row[i] = problem.utility.value(grid.u_axis()[i]);
    }
    return grid;
}

namespace {

struct ScanBest {
    double r;
    double value;
};

inline void consider(ScanBest& best, double r, double value) {
    if (value > best.value || (value == best.value && r < best.r)) best = {r, value};
}

// Per-time-row machinery for evaluating phi_delta(r, u, t_base) at many
// (r, u) pairs. The claim term of the integrand is evaluated at fixed
// interarrival quadrature nodes; for exponential, uniform and point-mass
// claim laws the inner claim-size integral of the piecewise-linear value
// function is computed in closed form through per-node prefix tables, so
// the only quadrature error left lives on the interarrival axis.
class PhiRowContext {
public:
    PhiRowContext(double t_base, const ValueGrid& delta, const DpProblem& problem,
                  const SolverConfig& config)
        : delta_(delta),
          problem_(problem),
          config_(config),
          u_nodes_(delta.u_axis().nodes()),
          nu_(delta.u_count()),
          u_top_(delta.u_top()),
          t_base_(t_base),
          t0_(delta.t0()),
          rmax_(std::max(0.0, t0_ - t_base)) {
        const ModelParams& mp = problem_.params;
        drift_savings_ = std::exp(mp.alpha * t_base_) * (mp.a + mp.c / mp.alpha);
        c_over_alpha_ = mp.c / mp.alpha;

        build_scan_bounds();
        build_stop_tables();
        classify_inner();
        if (rmax_ > 0.0) {
            if (problem_.interarrival.is_point_mass())
                build_atom_nodes();
            else
                build_density_nodes();
        }
    }

    double rmax() const { return rmax_; }
    std::size_t bound_count() const { return bounds_.size(); }
    double bound_r(std::size_t m) const { return bounds_[m]; }

    // T1 at scan boundary m for capital u; exact g1(u) at m = 0.
    double stop_term_at_bound(std::size_t m, double u) const {
        const double w = stop_growth1_[m] * u + stop_dconst_[m];
        return stop_fbar_[m] * problem_.utility.value(w);
    }

    double stop_term(double r, double u) const {
        if (r > rmax_ * (1.0 + 1e-12) + 1e-300) return 0.0;
        const ModelParams& mp = problem_.params;
        const double g1 = std::expm1(mp.alpha1 * r);
        const double g = std::expm1(mp.alpha * r);
        const double w = (g1 + 1.0) * u + drift_savings_ * (g - g1) + c_over_alpha_ * g1;
        return problem_.interarrival.survival(r) * problem_.utility.value(w);
    }

    // J(s_k, u) for every prepared node.
    void eval_claim_term(double u, std::vector<double>& scratch) const {
        scratch.resize(s_.size());
        for (std::size_t k = 0; k < s_.size(); ++k)
            scratch[k] = active_[k] ? claim_term(k, u) : 0.0;
    }

    // Integral of f(s) J(s) over scan cell m, from prepared values.
    double cell_integral(std::size_t m, const std::vector<double>& js) const {
        if (atom_mode_) {
            if (s_.empty()) return 0.0;
            return (bounds_[m] < atom_s_ && atom_s_ <= bounds_[m + 1]) ? js[0] : 0.0;
        }
        const std::size_t order = config_.quad_order;
        double sum = 0.0;
        for (std::size_t k = m * order; k < (m + 1) * order; ++k) sum += weight_[k] * js[k];
        return sum;
    }

    // cum[m] = integral of f(s) J(s) over [0, bound_r(m)].
    void cumulative_cells(const std::vector<double>& js, std::vector<double>& cum) const {
        cum.resize(bounds_.size());
        cum[0] = 0.0;
        for (std::size_t m = 1; m < bounds_.size(); ++m)
            cum[m] = cum[m - 1] + cell_integral(m - 1, js);
    }

    // Integral over [0, r] for arbitrary r in [0, rmax]. Inside the final
    // partial cell the prepared J values are interpolated linearly in s.
    double integral_to(double r, const std::vector<double>& js,
                       const std::vector<double>& cum) const {
        if (r <= 0.0 || rmax_ <= 0.0) return 0.0;
        r = std::min(r, rmax_);
        if (atom_mode_) {
            if (s_.empty()) return 0.0;
            return atom_s_ <= r ? js[0] : 0.0;
        }
        const auto it = std::upper_bound(bounds_.begin(), bounds_.end(), r);
        const std::size_t m = static_cast<std::size_t>(it - bounds_.begin()) - 1;
        if (m + 1 >= bounds_.size()) return cum.back();
        double sum = cum[m];
        if (r > bounds_[m]) {
            const auto f = [&](double s) {
                return problem_.interarrival.density(s) * interp_j(s, js);
            };
            sum += gl_integrate(f, bounds_[m], r, std::max<std::size_t>(4, config_.quad_order));
        }
        return sum;
    }

private:
    enum class InnerKind { ExpPrefix, ExpWindow, UniformPrefix, PointMass, Generic };

    void build_scan_bounds() {
        bounds_.push_back(0.0);
        if (rmax_ <= 0.0) return;
        const std::size_t L = std::max<std::size_t>(1, delta_.t_axis().cells());
        scan_step_ = t0_ / (4.0 * static_cast<double>(L) *
                            static_cast<double>(config_.s_panel_subdiv));
        const double cells_exact = rmax_ / scan_step_;
        std::size_t full = static_cast<std::size_t>(cells_exact + 1e-9);
        for (std::size_t m = 1; m <= full; ++m)
            bounds_.push_back(static_cast<double>(m) * scan_step_);
        if (bounds_.back() < rmax_ - 1e-12 * t0_)
            bounds_.push_back(rmax_);
        else
            bounds_.back() = rmax_;
    }

    void build_stop_tables() {
        const ModelParams& mp = problem_.params;
        stop_growth1_.resize(bounds_.size());
        stop_dconst_.resize(bounds_.size());
        stop_fbar_.resize(bounds_.size());
        for (std::size_t m = 0; m < bounds_.size(); ++m) {
            const double r = bounds_[m];
            const double g1 = std::expm1(mp.alpha1 * r);
            const double g = std::expm1(mp.alpha * r);
            stop_growth1_[m] = g1 + 1.0;
            stop_dconst_[m] = drift_savings_ * (g - g1) + c_over_alpha_ * g1;
            stop_fbar_[m] = problem_.interarrival.survival(r);
        }
    }

    void classify_inner() {
        switch (problem_.claim_size.kind()) {
            case DistKind::Exponential: {
                // kappa * u_top bounds the table exponents; switch to the
                // windowed path when they could overflow.
                const double kappa_max = problem_.claim_size.param1();
                inner_ = kappa_max * std::max(u_top_, 1.0) <= 300.0 ? InnerKind::ExpPrefix
                                                                    : InnerKind::ExpWindow;
                break;
            }
            case DistKind::Uniform:
                inner_ = InnerKind::UniformPrefix;
                break;
            case DistKind::Deterministic:
                inner_ = InnerKind::PointMass;
                break;
            case DistKind::Gamma:
                inner_ = InnerKind::Generic;
                break;
        }
    }

    void add_node(double s, double weight) {
        const ModelParams& mp = problem_.params;
        const double tp = t_base_ + s;
        s_.push_back(s);
        weight_.push_back(weight);
        const double g1 = std::expm1(mp.alpha1 * s);
        const double g = std::expm1(mp.alpha * s);
        growth1_.push_back(g1 + 1.0);
        dconst_.push_back(drift_savings_ * (g - g1) + c_over_alpha_ * g1);
        const double eb = std::exp(mp.beta * tp);
        ebeta_.push_back(eb);
        inv_ebeta_.push_back(1.0 / eb);
        active_.push_back(weight != 0.0 || atom_mode_);

        // Blend the two bracketing time rows of delta at t' = t_base + s.
        const Axis& ta = delta_.t_axis();
        std::size_t l = ta.cell(std::min(tp, t0_));
        const double theta =
            std::clamp((tp - ta[l]) / (ta[l + 1] - ta[l]), 0.0, 1.0);
        const double* row0 = delta_.t_row(l);
        const double* row1 = delta_.t_row(l + 1);
        const std::size_t base = blended_.size();
        blended_.resize(base + nu_);
        if (active_.back()) {
            for (std::size_t i = 0; i < nu_; ++i)
                blended_[base + i] = (1.0 - theta) * row0[i] + theta * row1[i];
        }

        if (inner_ == InnerKind::ExpPrefix) {
            const double kappa = problem_.claim_size.param1() * inv_ebeta_.back();
            kappa_.push_back(kappa);
            const std::size_t tb = epow_.size();
            epow_.resize(tb + nu_);
            prefix_.resize(tb + nu_);
            if (active_.back()) build_exp_tables(base, tb, kappa);
        } else if (inner_ == InnerKind::UniformPrefix) {
            const std::size_t tb = prefix_.size();
            prefix_.resize(tb + nu_);
            if (active_.back()) build_plain_prefix(base, tb);
        }
    }

    void build_exp_tables(std::size_t vbase, std::size_t tbase, double kappa) {
        double* epow = epow_.data() + tbase;
        double* prefix = prefix_.data() + tbase;
        const double* val = blended_.data() + vbase;
        for (std::size_t i = 0; i < nu_; ++i)
            epow[i] = std::exp(kappa * (u_nodes_[i] - u_top_));
        prefix[0] = 0.0;
        const double inv_kappa = 1.0 / kappa;
        for (std::size_t i = 0; i + 1 < nu_; ++i) {
            const double du = u_nodes_[i + 1] - u_nodes_[i];
            const double slope = (val[i + 1] - val[i]) / du;
            const double contrib = (val[i + 1] * epow[i + 1] - val[i] * epow[i]) * inv_kappa -
                                   slope * (epow[i + 1] - epow[i]) * inv_kappa * inv_kappa;
            prefix[i + 1] = prefix[i] + contrib;
        }
    }

    void build_plain_prefix(std::size_t vbase, std::size_t tbase) {
        double* prefix = prefix_.data() + tbase;
        const double* val = blended_.data() + vbase;
        prefix[0] = 0.0;
        for (std::size_t i = 0; i + 1 < nu_; ++i)
            prefix[i + 1] = prefix[i] +
                            0.5 * (val[i] + val[i + 1]) * (u_nodes_[i + 1] - u_nodes_[i]);
    }

    void build_density_nodes() {
        const std::size_t order = config_.quad_order;
        const GaussLegendreRule& rule = gauss_legendre(order);
        const std::size_t cells = bounds_.size() - 1;
        const std::size_t count = cells * order;
        reserve_nodes(count);
        for (std::size_t m = 0; m < cells; ++m) {
            const double lo = bounds_[m];
            const double hi = bounds_[m + 1];
            const double mid = 0.5 * (lo + hi);
            const double half = 0.5 * (hi - lo);
            for (std::size_t k = 0; k < order; ++k) {
                const double s = mid + half * rule.nodes[k];
                const double f = problem_.interarrival.density(s);
                add_node(s, half * rule.weights[k] * f);
            }
        }
    }

    void build_atom_nodes() {
        atom_mode_ = true;
        atom_s_ = problem_.interarrival.atom();
        if (atom_s_ <= rmax_) {
            reserve_nodes(1);
            add_node(atom_s_, 1.0);
        }
    }

    void reserve_nodes(std::size_t count) {
        s_.reserve(count);
        weight_.reserve(count);
        growth1_.reserve(count);
        dconst_.reserve(count);
        ebeta_.reserve(count);
        inv_ebeta_.reserve(count);
        active_.reserve(count);
        blended_.reserve(count * nu_);
        if (inner_ == InnerKind::ExpPrefix) {
            kappa_.reserve(count);
            epow_.reserve(count * nu_);
            prefix_.reserve(count * nu_);
        } else if (inner_ == InnerKind::UniformPrefix) {
            prefix_.reserve(count * nu_);
        }
    }

    double delta_s_eval(std::size_t k, double y) const {
        if (y < 0.0) return 0.0;
        const double* val = blended_.data() + k * nu_;
        if (y >= u_top_) return val[nu_ - 1];
        const std::size_t i = delta_.u_axis().cell(y);
        const double du = u_nodes_[i + 1] - u_nodes_[i];
        const double frac = (y - u_nodes_[i]) / du;
        return val[i] + (val[i + 1] - val[i]) * frac;
    }

    // Inner claim-size integral: int_0^{w e^{-beta t'}} delta_s(w - x e^{beta t'}) dH(x).
    double claim_integral(std::size_t k, double w) const {
        if (w <= 0.0) return 0.0;
        switch (inner_) {
            case InnerKind::PointMass: {
                const double y = w - problem_.claim_size.atom() * ebeta_[k];
                // strict survival: post-claim capital 0 is ruin
                return y > 0.0 ? delta_s_eval(k, y) : 0.0;
            }
            case InnerKind::ExpPrefix:
                return exp_prefix_integral(k, w);
            case InnerKind::ExpWindow:
                return exp_window_integral(k, w);
            case InnerKind::UniformPrefix:
                return uniform_prefix_integral(k, w);
            case InnerKind::Generic:
                return generic_integral(k, w);
        }
        return 0.0;
    }

    double exp_prefix_integral(std::size_t k, double w) const {
        const double kappa = kappa_[k];
        const double* val = blended_.data() + k * nu_;
        const double* epow = epow_.data() + k * nu_;
        const double* prefix = prefix_.data() + k * nu_;
        const double ew = std::exp(kappa * (w - u_top_));
        double total;
        if (w >= u_top_) {
            total = prefix[nu_ - 1] + val[nu_ - 1] * (ew - epow[nu_ - 1]) / kappa;
        } else {
            const std::size_t i = delta_.u_axis().cell(w);
            const double du = u_nodes_[i + 1] - u_nodes_[i];
            const double slope = (val[i + 1] - val[i]) / du;
            const double dw = val[i] + slope * (w - u_nodes_[i]);
            total = prefix[i] + (dw * ew - val[i] * epow[i]) / kappa -
                    slope * (ew - epow[i]) / (kappa * kappa);
        }
        return kappa * total / ew;
    }

    // Same integral evaluated only over y in [w - 45/kappa, w]; used when the
    // prefix-table exponents would overflow. Exact to double precision.
    double exp_window_integral(std::size_t k, double w) const {
        const double kappa = problem_.claim_size.param1() * inv_ebeta_[k];
        const double* val = blended_.data() + k * nu_;
        const double y_min = w - 45.0 / kappa;
        double total = 0.0;
        if (w > u_top_) {
            // constant tail value above the top node
            const double lo = std::max(u_top_, y_min);
            total += val[nu_ - 1] * (1.0 - std::exp(-kappa * (w - lo))) / kappa;
        }
        double y_hi = std::min(w, u_top_);
        while (y_hi > 0.0 && y_hi > y_min) {
            const std::size_t i =
                delta_.u_axis().cell(std::max(0.0, std::nextafter(y_hi, -1.0)));
            const double y_lo = std::max({u_nodes_[i], 0.0, y_min});
            const double du = u_nodes_[i + 1] - u_nodes_[i];
            const double slope = (val[i + 1] - val[i]) / du;
            const double d_lo = val[i] + slope * (y_lo - u_nodes_[i]);
            const double d_hi = val[i] + slope * (y_hi - u_nodes_[i]);
            const double e_lo = std::exp(-kappa * (w - y_lo));
            const double e_hi = std::exp(-kappa * (w - y_hi));
            total += (d_hi * e_hi - d_lo * e_lo) / kappa -
                     slope * (e_hi - e_lo) / (kappa * kappa);
            y_hi = u_nodes_[i];
        }
        return kappa * total;
    }

    double uniform_prefix_integral(std::size_t k, double w) const {
        const double lo = problem_.claim_size.param1();
        const double hi = problem_.claim_size.param2();
        const double eb = ebeta_[k];
        const double y_hi = w - lo * eb;
        const double y_lo = std::max(0.0, w - hi * eb);
        if (y_hi <= y_lo) return 0.0;
        const double scale = 1.0 / ((hi - lo) * eb);
        return scale * (plain_prefix_eval(k, y_hi) - plain_prefix_eval(k, y_lo));
    }

    double plain_prefix_eval(std::size_t k, double y) const {
        if (y <= 0.0) return 0.0;
        const double* val = blended_.data() + k * nu_;
        const double* prefix = prefix_.data() + k * nu_;
        if (y >= u_top_) return prefix[nu_ - 1] + val[nu_ - 1] * (y - u_top_);
        const std::size_t i = delta_.u_axis().cell(y);
        const double du = u_nodes_[i + 1] - u_nodes_[i];
        const double slope = (val[i + 1] - val[i]) / du;
        const double dy = y - u_nodes_[i];
        return prefix[i] + val[i] * dy + 0.5 * slope * dy * dy;
    }

    double generic_integral(std::size_t k, double w) const {
        const Distribution& H = problem_.claim_size;
        const double x_lo = H.support_lower();
        const double x_hi = std::min(w * inv_ebeta_[k], H.support_upper());
        if (x_hi <= x_lo) return 0.0;
        const double eb = ebeta_[k];
        const auto f = [&](double x) { return delta_s_eval(k, w - x * eb) * H.density(x); };
        return gl_integrate_panels(f, x_lo, x_hi, config_.claim_panels, config_.quad_order);
    }

    double claim_term(std::size_t k, double u) const {
        const double p = problem_.params.p;
        const double w = growth1_[k] * u + dconst_[k];
        double j = 0.0;
        if (p > 0.0) j += p * claim_integral(k, w);
        if (p < 1.0) {
            double refused = delta_s_eval(k, w);
            if (config_.mode == PhiMode::AsPrinted && refused != 0.0)
                refused *= problem_.claim_size.cdf(w * inv_ebeta_[k]);
            j += (1.0 - p) * refused;
        }
        return j;
    }

    double interp_j(double s, const std::vector<double>& js) const {
        if (s_.empty()) return 0.0;
        if (s <= s_.front()) return js.front();
        if (s >= s_.back()) return js.back();
        const auto it = std::upper_bound(s_.begin(), s_.end(), s);
        const std::size_t k = static_cast<std::size_t>(it - s_.begin());
        const double frac = (s - s_[k - 1]) / (s_[k] - s_[k - 1]);
        return js[k - 1] + (js[k] - js[k - 1]) * frac;
    }

    const ValueGrid& delta_;
    const DpProblem& problem_;
    const SolverConfig& config_;
    const std::vector<double>& u_nodes_;
    std::size_t nu_;
    double u_top_;
    double t_base_;
    double t0_;
    double rmax_;
    double drift_savings_ = 0.0;
    double c_over_alpha_ = 0.0;
    double scan_step_ = 0.0;

    InnerKind inner_ = InnerKind::Generic;
    bool atom_mode_ = false;
    double atom_s_ = 0.0;

    std::vector<double> bounds_;
    std::vector<double> stop_growth1_, stop_dconst_, stop_fbar_;

    std::vector<double> s_, weight_, growth1_, dconst_, ebeta_, inv_ebeta_;
    std::vector<char> active_;
    std::vector<double> kappa_;
    std::vector<double> blended_;  // delta blended at t' per node, nu_ values each
    std::vector<double> epow_;     // e^{kappa (u_i - u_top)} per node
    std::vector<double> prefix_;   // running inner integrals per node
};

template <typename F>
ScanBest golden_max(const F& f, double lo, double hi, double tol, ScanBest best) {
    constexpr double inv_phi = 0.61803398874989484820458683436564;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    consider(best, c, fc);
    consider(best, d, fd);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(best, c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(best, d, fd);
        }
    }
    return best;
}

}  // namespace

double phi_delta(double r, double u, double t, const ValueGrid& delta,
                 const ModelParams& params, const Distribution& interarrival,
                 const Distribution& claim_size, const Utility& utility, PhiMode mode,
                 const SolverConfig& config) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("phi_delta: r must be >= 0");
    if (!(u >= 0.0) || !std::isfinite(u)) throw std::invalid_argument("phi_delta: u must be >= 0");
    if (!(t >= 0.0) || t > delta.t0() * (1.0 + 1e-12))
        throw std::invalid_argument("phi_delta: t must lie in [0, t0]");
    SolverConfig local = config;
    local.mode = mode;
    DpProblem problem{params, interarrival, claim_size, utility};
    PhiRowContext ctx(std::min(t, delta.t0()), delta, problem, local);
    std::vector<double> js, cum;
    ctx.eval_claim_term(u, js);
    ctx.cumulative_cells(js, cum);
    return ctx.stop_term(r, u) + ctx.integral_to(r, js, cum);
}

PhiResult apply_phi(const ValueGrid& delta, const DpProblem& problem,
                    const SolverConfig& config) {
    const Axis& ua = delta.u_axis();
    const Axis& ta = delta.t_axis();
    if (std::abs(delta.t0() - problem.params.t0) > 1e-9 * std::max(1.0, problem.params.t0))
        throw std::invalid_argument("apply_phi: grid horizon differs from params.t0");

    PhiResult result{ValueGrid(ua, ta), PolicyGrid(ua, ta)};
    const double sup_g1 = problem.utility.sup();
    const std::size_t nu = ua.size();
    const std::size_t nt = ta.size();

    parallel_for(nt, config.threads, [&](std::size_t j) {
        const double t_base = ta[j];
        double* value_row = result.value.t_row(j);
        double* policy_row = result.policy.t_row(j);
        if (j + 1 == nt) {
            // r-interval degenerates to {0}: stop immediately.
            for (std::size_t i = 0; i < nu; ++i) {
                value_row[i] = problem.utility.value(ua[i]);
                policy_row[i] = 0.0;
            }
            return;
        }
        PhiRowContext ctx(t_base, delta, problem, config);
        std::vector<double> js, cum;
        for (std::size_t i = 0; i < nu; ++i) {
            const double u = ua[i];
            ctx.eval_claim_term(u, js);
            ctx.cumulative_cells(js, cum);

            const double stop_now = ctx.stop_term_at_bound(0, u);
            ScanBest best{0.0, stop_now};
            std::size_t best_m = 0;
            for (std::size_t m = 1; m < ctx.bound_count(); ++m) {
                const double phi = ctx.stop_term_at_bound(m, u) + cum[m];
                if (phi > best.value) {
                    best = {ctx.bound_r(m), phi};
                    best_m = m;
                }
            }

            const double lo = ctx.bound_r(best_m > 0 ? best_m - 1 : 0);
            const double hi = ctx.bound_r(std::min(best_m + 1, ctx.bound_count() - 1));
            if (hi - lo > config.r_refine_tol) {
                const auto phi_at = [&](double r) {
                    return ctx.stop_term(r, u) + ctx.integral_to(r, js, cum);
                };
                best = golden_max(phi_at, lo, hi, config.r_refine_tol, best);
            }
            if (ctx.rmax() - best.r < config.r_refine_tol) best.r = ctx.rmax();
            else if (best.r < config.r_refine_tol && best.value <= stop_now) best.r = 0.0;

            double v = best.value;
            if (v < stop_now) v = stop_now;  // r = 0 is always feasible
            if (v > sup_g1 + 1e-9)
                throw std::logic_error("apply_phi: node value exceeds the utility bound");
            value_row[i] = std::min(v, sup_g1);
            policy_row[i] = best.r;
        }
    });
    return result;
}

BackwardInductionResult backward_induction(std::size_t claims, const DpProblem& problem,
                                           const SolverConfig& config) {
    BackwardInductionResult result;
    result.values.push_back(make_gamma0(problem, config));
    for (std::size_t j = 0; j < claims; ++j) {
        PhiResult step = apply_phi(result.values.back(), problem, config);
        result.values.push_back(std::move(step.value));
        result.policies.push_back(std::move(step.policy));
    }
    return result;
}

FixedPointResult fixed_point(const DpProblem& problem, const SolverConfig& config) {
    const double q = problem.interarrival.cdf(problem.params.t0);
    if (q >= 1.0 - 1e-12)
        throw NonContractiveError(
            "fixed_point: P(interarrival > t0) = 0; the operator is not a contraction "
            "(F(t0) = " + std::to_string(q) + ")");

    ValueGrid current = make_gamma0(problem, config);
    PhiResult step = apply_phi(current, problem, config);
    double residual = step.value.max_abs_diff(current);
    std::vector<double> history{residual};
    std::size_t iterations = 1;

    std::size_t budget = config.max_iterations;
    if (budget == 0) {
        if (q <= 0.0 || residual <= config.fix_tol) {
            budget = iterations + 2;
        } else {
            const double raw =
                std::log(config.fix_tol * (1.0 - q) / residual) / std::log(q);
            budget = static_cast<std::size_t>(std::ceil(std::max(raw, 1.0))) + 10;
        }
    }

    while (residual > config.fix_tol) {
        if (iterations >= budget)
            throw MaxIterationsError("fixed_point: no convergence within " +
                                     std::to_string(budget) + " iterations (residual " +
                                     std::to_string(residual) + ")");
        PhiResult next = apply_phi(step.value, problem, config);
        residual = next.value.max_abs_diff(step.value);
        step = std::move(next);
        ++iterations;
        history.push_back(residual);
    }
    return FixedPointResult{std::move(step.value), std::move(step.policy), iterations, residual,
                            std::move(history)};
}

}  // namespace riskstop
