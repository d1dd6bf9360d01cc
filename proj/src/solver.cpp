#include "twolayer/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "twolayer/error.hpp"

namespace twolayer {

std::string to_string(OuterBoundary bc) {
    return bc == OuterBoundary::ZeroFlux ? "zero-flux" : "sink";
}

OuterBoundary outer_boundary_from_string(const std::string& s) {
    if (s == "zero-flux" || s == "ZERO_FLUX") return OuterBoundary::ZeroFlux;
    if (s == "sink" || s == "SINK") return OuterBoundary::Sink;
    throw ValidationError("outer_bc must be 'zero-flux' or 'sink', got '" + s + "'");
}

ValidationReport validate(const SolverConfig& c) {
    ValidationReport r;
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) r.add("dt", "time step must be finite and > 0");
    if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) r.add("t_end", "horizon must be finite and >= 0");
    if (!(c.theta >= 0.0 && c.theta <= 1.0)) r.add("theta", "must lie in [0,1]");
    if (c.sample_every < 1) r.add("sample_every", "must be >= 1");
    return r;
}

SimState initialize(const CompositeGrid& grid, const DimensionlessParams& /*p*/, double loading) {
    SimState s;
    s.t = 0.0;
    s.c0s.assign(grid.matrix_nodes(), loading);
    s.c0.assign(grid.matrix_nodes(), 0.0);
    s.c1s.assign(grid.tissue_nodes(), 0.0);
    s.c1.assign(grid.tissue_nodes(), 0.0);
    s.ci.assign(grid.tissue_nodes(), 0.0);
    return s;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Unknowns are interleaved by node to keep the bandwidth small:
// matrix node i -> (2i: solid, 2i+1: free), tissue node j -> T+3j+{0 bound, 1 free, 2 internalized}.
struct Layout {
    std::size_t nm = 0;
    std::size_t nt = 0;
    std::size_t c0s(std::size_t i) const { return 2 * i; }
    std::size_t c0(std::size_t i) const { return 2 * i + 1; }
    std::size_t offset() const { return 2 * nm; }
    std::size_t c1s(std::size_t j) const { return offset() + 3 * j; }
    std::size_t c1(std::size_t j) const { return offset() + 3 * j + 1; }
    std::size_t ci(std::size_t j) const { return offset() + 3 * j + 2; }
    std::size_t size() const { return 2 * nm + 3 * nt; }
};

Eigen::VectorXd pack(const Layout& L, const SimState& s) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(L.size()));
    for (std::size_t i = 0; i < L.nm; ++i) {
        u[static_cast<Eigen::Index>(L.c0s(i))] = s.c0s[i];
        u[static_cast<Eigen::Index>(L.c0(i))] = s.c0[i];
    }
    for (std::size_t j = 0; j < L.nt; ++j) {
        u[static_cast<Eigen::Index>(L.c1s(j))] = s.c1s[j];
        u[static_cast<Eigen::Index>(L.c1(j))] = s.c1[j];
        u[static_cast<Eigen::Index>(L.ci(j))] = s.ci[j];
    }
    return u;
}

void unpack(const Layout& L, const Eigen::VectorXd& u, SimState& s) {
    s.c0s.resize(L.nm);
    s.c0.resize(L.nm);
    s.c1s.resize(L.nt);
    s.c1.resize(L.nt);
    s.ci.resize(L.nt);
    for (std::size_t i = 0; i < L.nm; ++i) {
        s.c0s[i] = u[static_cast<Eigen::Index>(L.c0s(i))];
        s.c0[i] = u[static_cast<Eigen::Index>(L.c0(i))];
    }
    for (std::size_t j = 0; j < L.nt; ++j) {
        s.c1s[j] = u[static_cast<Eigen::Index>(L.c1s(j))];
        s.c1[j] = u[static_cast<Eigen::Index>(L.c1(j))];
        s.ci[j] = u[static_cast<Eigen::Index>(L.ci(j))];
    }
}

void check_shape(const Layout& L, const SimState& s) {
    if (s.c0s.size() != L.nm || s.c0.size() != L.nm || s.c1s.size() != L.nt ||
        s.c1.size() != L.nt || s.ci.size() != L.nt) {
        throw ValidationError("state array lengths do not match the grid");
    }
}

}  // namespace

struct Stepper::Impl {
    Layout layout;
    DimensionlessParams params;
    SolverConfig config;
    SpMat mass;        // W: trapezoidal weights (non-diagonal in the merged interface row)
    SpMat operator_;   // K: diffusion, reactions and membrane exchange, already weighted
    SpMat constraint;  // rows of algebraic conditions (perfect contact, sink)
    Eigen::VectorXd forcing;
    SpMat rhs_matrix;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;

    void assemble(const CompositeGrid& grid);
    void factor(double dt, Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>& solver,
                SpMat& rhs) const;
};

void Stepper::Impl::assemble(const CompositeGrid& grid) {
    const DimensionlessParams& p = params;
    const Layout& L = layout;
    const auto n = static_cast<Eigen::Index>(L.size());

    // Dense row buffers keyed by (row, col) are overkill here; accumulate triplets and
    // let setFromTriplets sum duplicates.
    std::vector<Triplet> w, k, g;
    forcing = Eigen::VectorXd::Zero(n);

    auto W = [&](std::size_t r, std::size_t c, double v) {
        w.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    };
    auto K = [&](std::size_t r, std::size_t c, double v) {
        k.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    };

    const double solid_loss = p.solid_loss_rate();
    const double free_gain = p.free_to_solid_rate();
    const double kc = p.km * p.clim;

    for (std::size_t i = 0; i < L.nm; ++i) {
        const double wt = grid.matrix_weight(i);
        W(L.c0s(i), L.c0s(i), wt);
        W(L.c0(i), L.c0(i), wt);
        K(L.c0s(i), L.c0s(i), -solid_loss * wt);
        K(L.c0s(i), L.c0(i), free_gain * wt);
        K(L.c0(i), L.c0s(i), solid_loss * wt);
        K(L.c0(i), L.c0(i), -free_gain * wt);
        forcing[static_cast<Eigen::Index>(L.c0s(i))] -= kc * wt;
        forcing[static_cast<Eigen::Index>(L.c0(i))] += kc * wt;
    }
    const double g0 = p.gamma / grid.h0();
    for (std::size_t i = 0; i + 1 < L.nm; ++i) {
        K(L.c0(i), L.c0(i), -g0);
        K(L.c0(i), L.c0(i + 1), g0);
        K(L.c0(i + 1), L.c0(i + 1), -g0);
        K(L.c0(i + 1), L.c0(i), g0);
    }

    for (std::size_t j = 0; j < L.nt; ++j) {
        const double wt = grid.tissue_weight(j);
        W(L.c1s(j), L.c1s(j), wt);
        W(L.c1(j), L.c1(j), wt);
        W(L.ci(j), L.ci(j), wt);
        K(L.c1s(j), L.c1(j), p.ka * wt);
        K(L.c1s(j), L.c1s(j), -(p.kd + p.ki) * wt);
        K(L.c1(j), L.c1(j), -p.ka * wt);
        K(L.c1(j), L.c1s(j), p.kd * wt);
        K(L.ci(j), L.c1s(j), p.ki * wt);
        K(L.ci(j), L.ci(j), -p.kid * wt);
    }
    const double g1 = p.d1 / grid.h1();
    for (std::size_t j = 0; j + 1 < L.nt; ++j) {
        K(L.c1(j), L.c1(j), -g1);
        K(L.c1(j), L.c1(j + 1), g1);
        K(L.c1(j + 1), L.c1(j + 1), -g1);
        K(L.c1(j + 1), L.c1(j), g1);
    }

    const std::size_t im = L.c0(L.nm - 1);  // matrix free drug at x = l0
    const std::size_t it = L.c1(0);         // tissue free drug at x = l0
    if (!p.perfect_contact()) {
        // J = pm (C0 - sigma C1) leaves the matrix and enters the tissue.
        K(im, im, -p.pm);
        K(im, it, p.pm * p.sigma);
        K(it, im, p.pm);
        K(it, it, -p.pm * p.sigma);
    }

    mass.resize(n, n);
    mass.setFromTriplets(w.begin(), w.end());
    operator_.resize(n, n);
    operator_.setFromTriplets(k.begin(), k.end());

    std::vector<std::size_t> algebraic;
    if (p.perfect_contact()) {
        // Sum the two interface half-cell balances into the matrix row; the tissue row
        // becomes C0 - sigma C1 = 0.
        SpMat merge(n, n);
        std::vector<Triplet> m;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (static_cast<std::size_t>(r) != it) m.emplace_back(static_cast<int>(r), static_cast<int>(r), 1.0);
        }
        m.emplace_back(static_cast<int>(im), static_cast<int>(it), 1.0);
        merge.setFromTriplets(m.begin(), m.end());
        mass = SpMat(merge * mass).pruned();
        operator_ = SpMat(merge * operator_).pruned();
        forcing = merge * forcing;
        g.emplace_back(static_cast<int>(it), static_cast<int>(im), 1.0);
        g.emplace_back(static_cast<int>(it), static_cast<int>(it), -p.sigma);
        algebraic.push_back(it);
    }
    if (config.outer_bc == OuterBoundary::Sink) {
        const std::size_t ib = L.c1(L.nt - 1);
        g.emplace_back(static_cast<int>(ib), static_cast<int>(ib), 1.0);
        algebraic.push_back(ib);
    }
    if (!algebraic.empty()) {
        Eigen::VectorXd keep = Eigen::VectorXd::Ones(n);
        for (std::size_t r : algebraic) {
            keep[static_cast<Eigen::Index>(r)] = 0.0;
            forcing[static_cast<Eigen::Index>(r)] = 0.0;
        }
        SpMat mask(n, n);
        mask.setIdentity();
        mask.diagonal() = keep;
        mass = SpMat(mask * mass).pruned();
        operator_ = SpMat(mask * operator_).pruned();
    }
    constraint.resize(n, n);
    constraint.setFromTriplets(g.begin(), g.end());
}

void Stepper::Impl::factor(double dt, Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>& solver,
                           SpMat& rhs) const {
    SpMat lhs = mass - (config.theta * dt) * operator_ + constraint;
    lhs.makeCompressed();
    solver.analyzePattern(lhs);
    solver.factorize(lhs);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "step matrix factorization failed (dt=" << dt << ", theta=" << config.theta
           << ", unknowns=" << lhs.rows() << "): " << solver.lastErrorMessage();
        throw NumericalError(os.str());
    }
    rhs = mass + ((1.0 - config.theta) * dt) * operator_;
}

Stepper::Stepper(const CompositeGrid& grid, const DimensionlessParams& p, const SolverConfig& config)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
    require_valid(validate(p));
    require_valid(validate(config));
    if (std::abs(grid.l0() - p.l0) > 1e-12 * p.l0 || std::abs(grid.l1() - p.l1) > 1e-12 * p.l1) {
        throw ValidationError("grid extents do not match the scaled layer coordinates");
    }
    impl_->layout = Layout{grid.matrix_nodes(), grid.tissue_nodes()};
    impl_->params = p;
    impl_->config = config;
    impl_->assemble(grid);
    impl_->factor(config.dt, impl_->lu, impl_->rhs_matrix);
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

std::size_t Stepper::unknowns() const { return impl_->layout.size(); }

SimState Stepper::step(const SimState& s) const {
    const Impl& m = *impl_;
    check_shape(m.layout, s);
    const Eigen::VectorXd u = pack(m.layout, s);
    const Eigen::VectorXd b = m.rhs_matrix * u + m.config.dt * m.forcing;
    const Eigen::VectorXd next = m.lu.solve(b);
    if (m.lu.info() != Eigen::Success || !next.allFinite()) {
        std::ostringstream os;
        os << "step from t=" << s.t << " produced a non-finite state (dt=" << m.config.dt << ")";
        throw NumericalError(os.str());
    }
    SimState out;
    out.t = s.t + m.config.dt;
    unpack(m.layout, next, out);
    if (m.config.clamp_nonnegative) {
        for (auto* f : {&out.c0s, &out.c0, &out.c1s, &out.c1, &out.ci}) {
            for (double& v : *f) v = std::max(v, 0.0);
        }
    }
    return out;
}

SimState Stepper::step(const SimState& s, double dt) const {
    if (dt == impl_->config.dt) return step(s);
    if (!(dt > 0.0)) throw ValidationError("step size must be > 0");
    const Impl& m = *impl_;
    check_shape(m.layout, s);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    SpMat rhs;
    m.factor(dt, lu, rhs);
    const Eigen::VectorXd next = lu.solve(rhs * pack(m.layout, s) + dt * m.forcing);
    if (lu.info() != Eigen::Success || !next.allFinite()) {
        std::ostringstream os;
        os << "step from t=" << s.t << " produced a non-finite state (dt=" << dt << ")";
        throw NumericalError(os.str());
    }
    SimState out;
    out.t = s.t + dt;
    unpack(m.layout, next, out);
    if (m.config.clamp_nonnegative) {
        for (auto* f : {&out.c0s, &out.c0, &out.c1s, &out.c1, &out.ci}) {
            for (double& v : *f) v = std::max(v, 0.0);
        }
    }
    return out;
}

double Stepper::outflow_rate(const SimState& s) const {
    if (impl_->config.outer_bc == OuterBoundary::ZeroFlux) return 0.0;
    return sink_outflow_rate(grid_, impl_->params, s);
}

SimState step(const SimState& state, const CompositeGrid& grid, const DimensionlessParams& p,
              const SolverConfig& config) {
    return Stepper(grid, p, config).step(state);
}

double min_value(const SimState& s) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto* f : {&s.c0, &s.c1s, &s.c1, &s.ci}) {
        for (double v : *f) m = std::min(m, v);
    }
    return m;
}

TimeSeries simulate_from(const SimState& initial, const DimensionlessParams& p,
                         const CompositeGrid& grid, const SolverConfig& config) {
    const Stepper stepper(grid, p, config);
    TimeSeries ts{grid, p, config, {}, std::min(0.0, min_value(initial))};

    const double t0 = initial.t;
    const double span = config.t_end - t0;
    ts.samples.push_back(initial);
    if (span <= 0.0) return ts;

    // Times are computed as t0 + n*dt rather than accumulated.
    auto full = static_cast<long long>(std::floor(span / config.dt * (1.0 + 1e-12)));
    double remainder = span - static_cast<double>(full) * config.dt;
    if (remainder < 1e-12 * std::max(1.0, span)) remainder = 0.0;

    SimState s = initial;
    for (long long n = 1; n <= full; ++n) {
        try {
            s = stepper.step(s);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " [simulation failed at step " +
                                 std::to_string(n) + "]");
        }
        s.t = t0 + static_cast<double>(n) * config.dt;
        ts.most_negative = std::min(ts.most_negative, min_value(s));
        const bool last = (n == full) && remainder == 0.0;
        if (n % config.sample_every == 0 || last) ts.samples.push_back(s);
    }
    if (remainder > 0.0) {
        s = stepper.step(s, remainder);
        s.t = config.t_end;
        ts.most_negative = std::min(ts.most_negative, min_value(s));
        ts.samples.push_back(s);
    }
    return ts;
}

TimeSeries simulate(const DimensionlessParams& p, const CompositeGrid& grid, const SolverConfig& config,
                    double loading) {
    return simulate_from(initialize(grid, p, loading), p, grid, config);
}

double matrix_mass(const CompositeGrid& grid, const SimState& s) {
    return grid.integrate_matrix(s.c0s) + grid.integrate_matrix(s.c0);
}

double tissue_mass(const CompositeGrid& grid, const SimState& s) {
    return grid.integrate_tissue(s.c1s) + grid.integrate_tissue(s.c1) + grid.integrate_tissue(s.ci);
}

double internalized_mass(const CompositeGrid& grid, const SimState& s) {
    return grid.integrate_tissue(s.ci);
}

double sink_outflow_rate(const CompositeGrid& grid, const DimensionlessParams& p, const SimState& s) {
    const std::size_t last = s.c1.size() - 1;
    return p.d1 * (s.c1[last - 1] - s.c1[last]) / grid.h1() + 0.5 * grid.h1() * p.kd * s.c1s[last];
}

}  // namespace twolayer
