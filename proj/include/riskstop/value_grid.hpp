#pragma once

#include <cstddef>
#include <vector>

namespace riskstop {

// Sorted node axis. Lookup is O(1) when the nodes form a few uniform runs
// (the solver builds axes that way); otherwise binary search.
class Axis {
public:
    explicit Axis(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    std::size_t cells() const { return nodes_.size() - 1; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double front() const { return nodes_.front(); }
    double back() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }

    // Index i with nodes[i] <= x <= nodes[i+1], clamped to valid cells.
    std::size_t cell(double x) const;

private:
    struct Run {
        double x0;
        double inv_step;
        std::size_t first_cell;
        std::size_t cell_count;
        double x_end;
    };

    std::vector<double> nodes_;
    std::vector<Run> runs_;  // empty -> binary search
};

// Discretized bounded function on [0, u_max] x [0, t0]. Between nodes the
// function is the bilinear interpolant; outside the domain it follows the
// zero/clamp extension rules of the value functions it represents:
//   u < 0  -> 0,  t > t0 -> 0,  u > u_max -> value at u_max,  t < 0 -> clamp.
class ValueGrid {
public:
    ValueGrid(Axis u_axis, Axis t_axis, double init = 0.0);

    std::size_t u_count() const { return u_axis_.size(); }
    std::size_t t_count() const { return t_axis_.size(); }
    const Axis& u_axis() const { return u_axis_; }
    const Axis& t_axis() const { return t_axis_; }
    double u_top() const { return u_axis_.back(); }
    double t0() const { return t_axis_.back(); }

    double at(std::size_t i, std::size_t j) const { return values_[j * u_axis_.size() + i]; }
    double& at(std::size_t i, std::size_t j) { return values_[j * u_axis_.size() + i]; }

    // Contiguous row of node values at time node j.
    const double* t_row(std::size_t j) const { return values_.data() + j * u_axis_.size(); }
    double* t_row(std::size_t j) { return values_.data() + j * u_axis_.size(); }

    double eval(double u, double t) const;

    double max_abs_diff(const ValueGrid& other) const;
    double min_value() const;
    double max_value() const;

private:
    Axis u_axis_;
    Axis t_axis_;
    std::vector<double> values_;
};

// Optimal waiting times r*(u_i, t_j) on the same node layout; values lie in
// [0, t0 - t_j]. Evaluation is bilinear with a clamp into [0, t0 - t].
class PolicyGrid {
public:
    PolicyGrid(Axis u_axis, Axis t_axis, double init = 0.0);

    std::size_t u_count() const { return u_axis_.size(); }
    std::size_t t_count() const { return t_axis_.size(); }
    const Axis& u_axis() const { return u_axis_; }
    const Axis& t_axis() const { return t_axis_; }
    double u_top() const { return u_axis_.back(); }
    double t0() const { return t_axis_.back(); }

    double at(std::size_t i, std::size_t j) const { return r_star_[j * u_axis_.size() + i]; }
    double& at(std::size_t i, std::size_t j) { return r_star_[j * u_axis_.size() + i]; }

    const double* t_row(std::size_t j) const { return r_star_.data() + j * u_axis_.size(); }
    double* t_row(std::size_t j) { return r_star_.data() + j * u_axis_.size(); }

    double eval(double u, double t) const;

private:
    Axis u_axis_;
    Axis t_axis_;
    std::vector<double> r_star_;
};

}  // namespace riskstop
