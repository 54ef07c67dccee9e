#include "riskstop/value_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskstop {

Axis::Axis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("Axis: need at least 2 nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::invalid_argument("Axis: nodes must be strictly increasing");

    // Group maximal runs of uniform spacing for O(1) lookup.
    const double span = nodes_.back() - nodes_.front();
    std::size_t run_start = 0;
    double run_step = nodes_[1] - nodes_[0];
    for (std::size_t i = 1; i <= cells(); ++i) {
        const bool uniform =
            i < cells() && std::abs((nodes_[i + 1] - nodes_[i]) - run_step) <= 1e-12 * span;
        if (!uniform) {
            runs_.push_back({nodes_[run_start], 1.0 / run_step, run_start, i - run_start,
                             nodes_[i]});
            if (i < cells()) {
                run_start = i;
                run_step = nodes_[i + 1] - nodes_[i];
            }
        }
    }
    if (runs_.size() > 16) runs_.clear();
}

std::size_t Axis::cell(double x) const {
    if (x <= nodes_.front()) return 0;
    if (x >= nodes_.back()) return cells() - 1;
    if (!runs_.empty()) {
        for (const Run& run : runs_) {
            if (x < run.x_end || &run == &runs_.back()) {
                const double offset = (x - run.x0) * run.inv_step;
                const std::size_t local =
                    std::min(run.cell_count - 1,
                             static_cast<std::size_t>(std::max(0.0, offset)));
                // Guard FP edges so nodes_[cell] <= x holds.
                std::size_t idx = run.first_cell + local;
                while (idx > 0 && x < nodes_[idx]) --idx;
                while (idx + 1 < cells() && x >= nodes_[idx + 1]) ++idx;
                return idx;
            }
        }
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

namespace {

// Shared bilinear kernel with clamped u above the top node.
template <typename Grid>
double bilinear(const Grid& grid, const Axis& ua, const Axis& ta, double u, double t) {
    if (u > ua.back()) u = ua.back();
    if (t < ta.front()) t = ta.front();
    const std::size_t iu = ua.cell(u);
    const std::size_t jt = ta.cell(t);
    const double fu = std::clamp((u - ua[iu]) / (ua[iu + 1] - ua[iu]), 0.0, 1.0);
    const double ft = std::clamp((t - ta[jt]) / (ta[jt + 1] - ta[jt]), 0.0, 1.0);
    const double lo = grid.at(iu, jt) * (1.0 - fu) + grid.at(iu + 1, jt) * fu;
    const double hi = grid.at(iu, jt + 1) * (1.0 - fu) + grid.at(iu + 1, jt + 1) * fu;
    return lo * (1.0 - ft) + hi * ft;
}

}  // namespace

ValueGrid::ValueGrid(Axis u_axis, Axis t_axis, double init)
    : u_axis_(std::move(u_axis)),
      t_axis_(std::move(t_axis)),
      values_(u_axis_.size() * t_axis_.size(), init) {}

double ValueGrid::eval(double u, double t) const {
    if (u < 0.0) return 0.0;
    if (t > t0()) return 0.0;
    return bilinear(*this, u_axis_, t_axis_, u, t);
}

double ValueGrid::max_abs_diff(const ValueGrid& other) const {
    if (other.values_.size() != values_.size())
        throw std::invalid_argument("max_abs_diff: grid shapes differ");
    double worst = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k)
        worst = std::max(worst, std::abs(values_[k] - other.values_[k]));
    return worst;
}

double ValueGrid::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double ValueGrid::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

PolicyGrid::PolicyGrid(Axis u_axis, Axis t_axis, double init)
    : u_axis_(std::move(u_axis)),
      t_axis_(std::move(t_axis)),
      r_star_(u_axis_.size() * t_axis_.size(), init) {}

double PolicyGrid::eval(double u, double t) const {
    const double r = bilinear(*this, u_axis_, t_axis_, u, t);
    const double budget = t0() - t;
    return std::clamp(r, 0.0, budget > 0.0 ? budget : 0.0);
}

}  // namespace riskstop
