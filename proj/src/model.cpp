#include "feynprop/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "feynprop/errors.hpp"

namespace feynprop {

//---------------------------------------------------------------------------//
// PotentialSpec
//---------------------------------------------------------------------------//

double PotentialSpec::delta_support_radius() const
{
    double a = 0.0;
    for (const auto& d : delta_atoms) a = std::max(a, std::abs(d.location));
    return a;
}

PotentialSpec PotentialSpec::scaled(double lambda) const
{
    PotentialSpec out = *this;
    out.g *= lambda;
    return out;
}

void PotentialSpec::validate() const
{
    if (!std::isfinite(g)) throw DomainError("potential: coupling g is not finite");
    for (std::size_t l = 0; l < exp_atoms.size(); ++l) {
        const auto& a = exp_atoms[l];
        if (!std::isfinite(a.alpha) || !std::isfinite(a.coeff.real()) ||
            !std::isfinite(a.coeff.imag())) {
            throw DomainError("potential: exp atom " + std::to_string(l) +
                              " has non-finite data");
        }
    }
    for (std::size_t j = 0; j < delta_atoms.size(); ++j) {
        const auto& d = delta_atoms[j];
        if (!std::isfinite(d.location) || !std::isfinite(d.weight)) {
            throw DomainError("potential: delta atom " + std::to_string(j) +
                              " has non-finite data");
        }
    }
}

Complex eval_potential(const PotentialSpec& p, double x)
{
    Complex v{0.0, 0.0};
    for (std::size_t l = 0; l < p.exp_atoms.size(); ++l) {
        const auto& atom = p.exp_atoms[l];
        const double e = std::exp(atom.alpha * x);
        if (!std::isfinite(e)) {
            std::ostringstream msg;
            msg << "eval_potential: exp(alpha*x) overflows for exp atom " << l
                << " (alpha=" << atom.alpha << ", x=" << x << ")";
            throw RangeError(msg.str());
        }
        v += atom.coeff * e;
    }
    return p.g * v;
}

//---------------------------------------------------------------------------//
// TestFunction
//---------------------------------------------------------------------------//

TestFunction::TestFunction(std::vector<Node> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() == 1) {
        throw DomainError("TestFunction: a single node cannot carry compact support");
    }
    if (nodes_.empty()) return;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (!std::isfinite(n.time) || !std::isfinite(n.value.real()) ||
            !std::isfinite(n.value.imag())) {
            throw DomainError("TestFunction: non-finite node " + std::to_string(i));
        }
        if (i > 0 && !(n.time > nodes_[i - 1].time)) {
            throw DomainError("TestFunction: node times must be strictly increasing");
        }
    }
    if (nodes_.front().value != Complex{} || nodes_.back().value != Complex{}) {
        throw DomainError("TestFunction: first and last node values must be zero");
    }
    bool all_zero = std::all_of(nodes_.begin(), nodes_.end(),
                                [](const Node& n) { return n.value == Complex{}; });
    if (all_zero) {
        nodes_.clear();
        return;
    }

    cum_.assign(nodes_.size(), Complex{});
    cum_sq_.assign(nodes_.size(), Complex{});
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const double h = nodes_[i + 1].time - nodes_[i].time;
        const Complex f0 = nodes_[i].value;
        const Complex f1 = nodes_[i + 1].value;
        cum_[i + 1] = cum_[i] + 0.5 * h * (f0 + f1);
        // int of a linear function squared: h/3 (f0^2 + f0 f1 + f1^2)
        cum_sq_[i + 1] = cum_sq_[i] + h / 3.0 * (f0 * f0 + f0 * f1 + f1 * f1);
    }
}

double TestFunction::support_begin() const
{
    return nodes_.empty() ? 0.0 : nodes_.front().time;
}

double TestFunction::support_end() const
{
    return nodes_.empty() ? 0.0 : nodes_.back().time;
}

std::size_t TestFunction::segment_of(double tau) const
{
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau,
                               [](double v, const Node& n) { return v < n.time; });
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Complex TestFunction::operator()(double tau) const
{
    if (nodes_.empty() || tau <= nodes_.front().time || tau >= nodes_.back().time) {
        return {};
    }
    const std::size_t i = segment_of(tau);
    const auto& a = nodes_[i];
    const auto& b = nodes_[i + 1];
    const double w = (tau - a.time) / (b.time - a.time);
    return a.value + w * (b.value - a.value);
}

Complex TestFunction::slope(double tau) const
{
    if (nodes_.empty() || tau < nodes_.front().time || tau >= nodes_.back().time) {
        return {};
    }
    const std::size_t i = segment_of(tau);
    return (nodes_[i + 1].value - nodes_[i].value) /
           (nodes_[i + 1].time - nodes_[i].time);
}

Complex TestFunction::primitive(double tau) const
{
    if (nodes_.empty() || tau <= nodes_.front().time) return {};
    if (tau >= nodes_.back().time) return cum_.back();
    const std::size_t i = segment_of(tau);
    const double h = tau - nodes_[i].time;
    const Complex f = nodes_[i].value;
    const Complex m = (nodes_[i + 1].value - f) / (nodes_[i + 1].time - nodes_[i].time);
    return cum_[i] + h * (f + 0.5 * m * h);
}

Complex TestFunction::primitive_sq(double tau) const
{
    if (nodes_.empty() || tau <= nodes_.front().time) return {};
    if (tau >= nodes_.back().time) return cum_sq_.back();
    const std::size_t i = segment_of(tau);
    const double h = tau - nodes_[i].time;
    const Complex f = nodes_[i].value;
    const Complex m = (nodes_[i + 1].value - f) / (nodes_[i + 1].time - nodes_[i].time);
    return cum_sq_[i] + h * (f * f + h * (f * m + m * m * h / 3.0));
}

Complex TestFunction::integral(double a, double b) const
{
    if (nodes_.empty()) return {};
    return primitive(b) - primitive(a);
}

Complex TestFunction::integral_sq(double a, double b) const
{
    if (nodes_.empty()) return {};
    return primitive_sq(b) - primitive_sq(a);
}

double TestFunction::l2_norm_sq() const
{
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const double h = nodes_[i + 1].time - nodes_[i].time;
        const Complex f = nodes_[i].value;
        const Complex m = (nodes_[i + 1].value - f) / h;
        acc += std::norm(f) * h + std::real(f * std::conj(m)) * h * h +
               std::norm(m) * h * h * h / 3.0;
    }
    return acc;
}

double TestFunction::sup_abs(double a, double b) const
{
    if (nodes_.empty()) return 0.0;
    // |linear complex function| is convex on each segment
    double s = std::max(std::abs((*this)(a)), std::abs((*this)(b)));
    for (const auto& n : nodes_) {
        if (n.time > a && n.time < b) s = std::max(s, std::abs(n.value));
    }
    return s;
}

double TestFunction::total_variation(double a, double b) const
{
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const double lo = std::max(a, nodes_[i].time);
        const double hi = std::min(b, nodes_[i + 1].time);
        if (hi <= lo) continue;
        const double h = nodes_[i + 1].time - nodes_[i].time;
        tv += std::abs(nodes_[i + 1].value - nodes_[i].value) / h * (hi - lo);
    }
    return tv;
}

TestFunction TestFunction::scaled(Complex lambda) const
{
    std::vector<Node> out(nodes_.begin(), nodes_.end());
    for (auto& n : out) n.value *= lambda;
    if (lambda == Complex{}) return {};
    return TestFunction(std::move(out));
}

//---------------------------------------------------------------------------//
// ShiftedArgument
//---------------------------------------------------------------------------//

ShiftedArgument::ShiftedArgument(TestFunction base, double end,
                                 std::vector<ImaginaryStep> steps)
    : base_(std::move(base)), end_(end), steps_(std::move(steps))
{
    for (const auto& s : steps_) {
        if (!std::isfinite(s.start) || !std::isfinite(s.alpha) || s.start > end_) {
            throw DomainError("ShiftedArgument: step start must be finite and <= end");
        }
    }
}

double ShiftedArgument::step_sum(double tau) const
{
    double acc = 0.0;
    if (tau > end_) return acc;
    for (const auto& s : steps_) {
        if (tau > s.start) acc += s.alpha;
    }
    return acc;
}

Complex ShiftedArgument::operator()(double tau) const
{
    return base_(tau) + kI * step_sum(tau);
}

PiecewiseIntegrals piecewise_integrals(const ShiftedArgument& f, double a, double b)
{
    if (!(a <= b)) throw DomainError("piecewise_integrals: requires a <= b");
    PiecewiseIntegrals out;
    if (a == b) return out;

    // Pieces on which the step sum is constant; the base is integrated in
    // closed form on each.
    std::vector<double> cuts{a, b};
    for (const auto& s : f.steps()) {
        if (s.start > a && s.start < b) cuts.push_back(s.start);
    }
    if (f.end() > a && f.end() < b) cuts.push_back(f.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const TestFunction& base = f.base();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        const Complex shift = kI * f.step_sum(0.5 * (lo + hi));
        const Complex i1 = base.integral(lo, hi);
        const Complex i2 = base.integral_sq(lo, hi);
        const double len = hi - lo;
        out.first += i1 + shift * len;
        out.second += i2 + 2.0 * shift * i1 + shift * shift * len;
    }
    return out;
}

double appendix_norm(const TestFunction& f, double t0, double t)
{
    if (f.is_zero()) return 0.0;
    return f.sup_abs(t0, t) + f.total_variation(t0, t) + std::sqrt(f.l2_norm_sq());
}

}  // namespace feynprop
