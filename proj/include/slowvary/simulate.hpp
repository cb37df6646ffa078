#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "slowvary/error.hpp"
#include "slowvary/fft.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"
#include "slowvary/reduction.hpp"
#include "slowvary/spectral_split.hpp"

namespace slowvary {

/// Periodic box; point index is row-major over `sizes` (last dimension
/// fastest). Sizes are powers of two; a size of 1 makes that direction inert.
struct Grid {
    std::vector<int> sizes;
    std::vector<double> lengths;

    Grid() = default;
    Grid(std::vector<int> s, std::vector<double> l) : sizes(std::move(s)), lengths(std::move(l))
    {
        if (sizes.empty() || sizes.size() != lengths.size())
            fail(ErrorKind::InvalidArgument, "grid needs one size and one length per dimension");
        for (size_t d = 0; d < sizes.size(); ++d) {
            if (sizes[d] < 1 || (sizes[d] & (sizes[d] - 1)) != 0)
                fail(ErrorKind::InvalidArgument, "grid sizes must be powers of two");
            if (!(lengths[d] > 0) || !std::isfinite(lengths[d]))
                fail(ErrorKind::InvalidArgument, "grid lengths must be positive");
        }
    }

    int dims() const { return static_cast<int>(sizes.size()); }

    Eigen::Index points() const
    {
        Eigen::Index p = 1;
        for (int s : sizes)
            p *= s;
        return p;
    }

    std::vector<int> coords(Eigen::Index p) const
    {
        std::vector<int> c(sizes.size());
        for (int d = dims() - 1; d >= 0; --d) {
            c[static_cast<size_t>(d)] = static_cast<int>(p % sizes[static_cast<size_t>(d)]);
            p /= sizes[static_cast<size_t>(d)];
        }
        return c;
    }

    double coordinate(int d, int i) const
    {
        return lengths[static_cast<size_t>(d)] * i / sizes[static_cast<size_t>(d)];
    }
};

/// Values are stored components x points.
struct Field {
    Grid grid;
    double time = 0.0;
    MatrixXd values;

    int components() const { return static_cast<int>(values.rows()); }
};
using MicroField = Field;
using MacroField = Field;

inline Field make_field(const Grid& grid, int components, const std::function<VectorXd(const std::vector<double>&)>& f,
                        double time = 0.0)
{
    Field out{grid, time, MatrixXd(components, grid.points())};
    std::vector<double> x(static_cast<size_t>(grid.dims()));
    for (Eigen::Index p = 0; p < grid.points(); ++p) {
        const auto c = grid.coords(p);
        for (int d = 0; d < grid.dims(); ++d)
            x[static_cast<size_t>(d)] = grid.coordinate(d, c[static_cast<size_t>(d)]);
        const VectorXd v = f(x);
        if (v.size() != components)
            fail(ErrorKind::InvalidArgument, "initial-data function returned the wrong number of components");
        out.values.col(p) = v;
    }
    return out;
}

/// <Z0, u> at every point.
inline Field project(const Field& u, const MatrixXd& Z0)
{
    if (Z0.rows() != u.components())
        fail(ErrorKind::InvalidArgument, "projection basis does not match the field");
    return Field{u.grid, u.time, Z0.transpose() * u.values};
}

struct Preflight {
    double max_rate = 0.0;       // max |eigenvalue| of the symbol over active modes (or a norm bound)
    double abscissa = std::numeric_limits<double>::quiet_NaN();  // max Re eigenvalue; NaN when bounded only
    bool eigen_based = false;
    Eigen::Index active_modes = 0;
};

/// Mode-wise evaluation of sum_k L_k (i kappa)^k on a periodic grid. The
/// Nyquist wavenumber contributes zero to odd derivative orders.
class SpectralPropagator {
public:
    SpectralPropagator(const OperatorFamily<double>& fam, const Grid& grid, bool filter_high = false)
        : grid_(grid), dim_(fam.dim_u()), ops_(fam.operators())
    {
        if (fam.dims() != grid.dims())
            fail(ErrorKind::InvalidArgument, "grid dimension count does not match the operator family");
        const Eigen::Index np = grid.points();
        mask_ = VectorXd::Ones(np);
        std::vector<std::vector<double>> kappa(static_cast<size_t>(np));
        std::vector<std::vector<bool>> nyquist(static_cast<size_t>(np));
        for (Eigen::Index p = 0; p < np; ++p) {
            const auto c = grid.coords(p);
            for (int d = 0; d < grid.dims(); ++d) {
                const int n = grid.sizes[static_cast<size_t>(d)];
                const int i = c[static_cast<size_t>(d)];
                const int j = (i < (n + 1) / 2) ? i : i - n;
                const bool nyq = n > 1 && n % 2 == 0 && i == n / 2;
                kappa[static_cast<size_t>(p)].push_back(2.0 * std::numbers::pi * j / grid.lengths[static_cast<size_t>(d)]);
                nyquist[static_cast<size_t>(p)].push_back(nyq);
                if (filter_high && n > 1 && 3 * std::abs(j) > n)
                    mask_(p) = 0.0;
            }
        }
        for (const auto& [k, op] : ops_) {
            VectorXc factor(np);
            for (Eigen::Index p = 0; p < np; ++p) {
                std::complex<double> f = 1.0;
                for (int d = 0; d < grid.dims(); ++d) {
                    const int e = k[d];
                    if (e == 0)
                        continue;
                    if (nyquist[static_cast<size_t>(p)][static_cast<size_t>(d)] && e % 2 == 1) {
                        f = 0.0;
                        break;
                    }
                    f *= std::pow(std::complex<double>(0.0, kappa[static_cast<size_t>(p)][static_cast<size_t>(d)]), e);
                }
                factor(p) = f;
            }
            terms_.push_back({&op, std::move(factor)});
        }
    }

    SpectralPropagator(const SpectralPropagator&) = delete;
    SpectralPropagator& operator=(const SpectralPropagator&) = delete;

    const Grid& grid() const { return grid_; }
    int dim() const { return dim_; }
    const VectorXd& mask() const { return mask_; }
    bool filtered() const { return mask_.minCoeff() == 0.0; }

    MatrixXc forward(const MatrixXd& values) const
    {
        MatrixXc y = values.cast<std::complex<double>>();
        InterleavedFft fft(grid_.sizes, dim_, y.data());
        fft.forward();
        return y;
    }

    MatrixXd backward(MatrixXc y) const
    {
        InterleavedFft fft(grid_.sizes, dim_, y.data());
        fft.backward();
        return y.real() / static_cast<double>(grid_.points());
    }

    /// sum_k L_k Y diag(factor_k), masked.
    MatrixXc rhs(const MatrixXc& y) const
    {
        MatrixXc out = MatrixXc::Zero(y.rows(), y.cols());
        const MatrixXd yr = y.real(), yi = y.imag();
        MatrixXd re(y.rows(), y.cols()), im(y.rows(), y.cols());
        MatrixXc t(y.rows(), y.cols());
        for (const auto& term : terms_) {
            re.noalias() = (*term.op) * yr;
            im.noalias() = (*term.op) * yi;
            t.real() = re;
            t.imag() = im;
            out += t * term.factor.asDiagonal();
        }
        apply_mask(out);
        return out;
    }

    void apply_mask(MatrixXc& y) const
    {
        for (Eigen::Index p = 0; p < y.cols(); ++p)
            if (mask_(p) == 0.0)
                y.col(p).setZero();
    }

    /// Applies the symbol to a real field and returns the real result.
    MatrixXd apply(const MatrixXd& values) const { return backward(rhs(forward(values))); }

    void rk4(MatrixXc& y, double dt) const
    {
        const MatrixXc k1 = rhs(y);
        const MatrixXc k2 = rhs(y + 0.5 * dt * k1);
        const MatrixXc k3 = rhs(y + 0.5 * dt * k2);
        const MatrixXc k4 = rhs(y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    /// Symbol matrix at one grid mode.
    MatrixXc symbol(Eigen::Index p) const
    {
        MatrixXc s = MatrixXc::Zero(dim_, dim_);
        for (const auto& term : terms_)
            s += term.factor(p) * term.op->cast<std::complex<double>>();
        return s;
    }

    Preflight preflight() const
    {
        Preflight out;
        const Eigen::Index np = grid_.points();
        for (Eigen::Index p = 0; p < np; ++p)
            if (mask_(p) != 0.0)
                ++out.active_modes;
        const double work = static_cast<double>(out.active_modes) * dim_ * dim_ * dim_;
        out.eigen_based = dim_ <= 64 && work <= 2e8;
        if (out.eigen_based)
            out.abscissa = -std::numeric_limits<double>::infinity();
        for (Eigen::Index p = 0; p < np; ++p) {
            if (mask_(p) == 0.0)
                continue;
            const MatrixXc s = symbol(p);
            if (out.eigen_based) {
                Eigen::ComplexEigenSolver<MatrixXc> es(s, false);
                for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                    out.max_rate = std::max(out.max_rate, std::abs(es.eigenvalues()(i)));
                    out.abscissa = std::max(out.abscissa, es.eigenvalues()(i).real());
                }
            } else {
                out.max_rate = std::max(out.max_rate, s.cwiseAbs().colwise().sum().maxCoeff());
            }
        }
        return out;
    }

private:
    struct Term {
        const MatrixXd* op;
        VectorXc factor;
    };
    Grid grid_;
    int dim_;
    OperatorFamily<double>::OperatorMap ops_;  // owned copy; terms_ point into it
    VectorXd mask_;
    std::vector<Term> terms_;
};

struct SimulationOptions {
    double T = 0.0;                 // duration
    double dt = 0.0;                // 0: 0.2 / max symbol rate
    double sample_interval = 0.0;   // 0: only the start and end
    bool filter_high = false;       // drop the top third of wavenumbers
    double growth_limit = 1e6;
};

struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<MatrixXd> frames;   // components x points
    double dt = 0.0;
    long steps = 0;
    Preflight preflight;
    bool filtered = false;

    int components() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
    Field frame(size_t i) const { return Field{grid, times.at(i), frames.at(i)}; }
};

/// RK4 in Fourier space. Stepping the transformed state is identical to
/// stepping the physical state with spectral derivatives, since the
/// transform is linear; physical frames are produced only at sample times.
inline Trajectory simulate(const OperatorFamily<double>& fam, const Field& field0, const SimulationOptions& opt)
{
    if (field0.components() != fam.dim_u())
        fail(ErrorKind::InvalidArgument, "initial field does not match dimU");
    if (!(opt.T >= 0) || !std::isfinite(opt.T))
        fail(ErrorKind::InvalidArgument, "duration must be non-negative");
    if (!field0.values.allFinite())
        fail(ErrorKind::InvalidArgument, "initial field has non-finite values");
    const SpectralPropagator prop(fam, field0.grid, opt.filter_high);

    Trajectory out;
    out.grid = field0.grid;
    out.filtered = prop.filtered();
    out.preflight = prop.preflight();

    double interval = opt.sample_interval > 0 ? opt.sample_interval : opt.T;
    long samples = 0;
    if (opt.T > 0) {
        samples = std::max(1L, std::lround(opt.T / interval));
        if (std::abs(samples * interval - opt.T) > 1e-9 * opt.T) {
            samples = static_cast<long>(std::ceil(opt.T / interval - 1e-9));
            interval = opt.T / static_cast<double>(samples);
        }
    }
    double dt = opt.dt;
    if (!(dt > 0))
        dt = out.preflight.max_rate > 0 ? 0.2 / out.preflight.max_rate : std::max(interval, 1.0);
    long per_sample = 1;
    if (opt.T > 0) {
        per_sample = std::max(1L, static_cast<long>(std::ceil(interval / dt - 1e-9)));
        dt = interval / static_cast<double>(per_sample);
    }
    out.dt = dt;

    MatrixXc y = prop.forward(field0.values);
    prop.apply_mask(y);
    const double n0 = y.norm();
    out.times.push_back(field0.time);
    out.frames.push_back(prop.backward(y));
    for (long s = 1; s <= samples; ++s) {
        for (long i = 0; i < per_sample; ++i) {
            prop.rk4(y, dt);
            ++out.steps;
        }
        const double norm = y.norm();
        if (!std::isfinite(norm) || (n0 > 0 && norm > opt.growth_limit * n0))
            fail(ErrorKind::StabilityViolation,
                 "solution norm grew by more than " + ScalarTraits<double>::format(opt.growth_limit) + " at t = " +
                     ScalarTraits<double>::format(field0.time + s * interval) + " (symbol abscissa " +
                     ScalarTraits<double>::format(out.preflight.abscissa) + ")");
        out.times.push_back(field0.time + static_cast<double>(s) * interval);
        out.frames.push_back(prop.backward(y));
    }
    return out;
}

inline Trajectory simulate_micro(const OperatorFamily<double>& fam, const MicroField& field0, double T, double dt = 0.0,
                                 double sample_interval = 0.0)
{
    return simulate(fam, field0, SimulationOptions{T, dt, sample_interval, false, 1e6});
}

/// The macroscale model as an operator family on m components.
inline OperatorFamily<double> model_family(const ReducedModel<double>& model)
{
    return OperatorFamily<double>(model.dims, model.m, model.coeffs);
}

/// Odd truncation orders carry non-dissipative high-wavenumber dispersion,
/// so those models run with the top third of wavenumbers removed
/// (Trajectory::filtered records this).
inline Trajectory simulate_macro(const ReducedModel<double>& model, const MacroField& U0, double T, double dt = 0.0,
                                 double sample_interval = 0.0)
{
    return simulate(model_family(model), U0, SimulationOptions{T, dt, sample_interval, model.order % 2 == 1, 1e6});
}

struct EmergenceResult {
    double t_skip = 0.0;
    std::vector<double> times;
    std::vector<double> errors;
    double rate = 0.0;          // least-squares slope of e against t - t_skip over samples with e <= 0.1
    int rate_samples = 0;
    double max_error = 0.0;
    bool macro_filtered = false;
};

namespace detail {

/// Least-squares slope and intercept.
inline std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (x.size() < 2 || den == 0.0)
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double slope = (n * sxy - sx * sy) / den;
    return {slope, (sy - slope * sx) / n};
}

} // namespace detail

/// Runs the microscale system to t_skip (default ln(1e6)/beta), starts the
/// macroscale model from <Z0, u(t_skip)>, and compares
///   e(t) = ||<Z0,u>(t) - U(t)|| / ||<Z0,u>(t)||
/// at every sample up to the end time T.
inline EmergenceResult emergence_error(const OperatorFamily<double>& fam, const ReducedModel<double>& model,
                                       const SpectralSplit<double>& split, const MicroField& field0, double T,
                                       std::optional<double> t_skip = std::nullopt, double sample_interval = 1.0,
                                       double dt = 0.0)
{
    EmergenceResult out;
    out.t_skip = t_skip ? *t_skip : (std::isfinite(split.beta) ? std::log(1e6) / split.beta : 0.0);
    if (!(T > out.t_skip))
        fail(ErrorKind::InvalidArgument, "end time must exceed the burn-in time " + ScalarTraits<double>::format(out.t_skip));
    MicroField u_skip = field0;
    if (out.t_skip > 0) {
        auto burn = simulate(fam, field0, SimulationOptions{out.t_skip, dt, out.t_skip, false, 1e6});
        u_skip = burn.frame(burn.frames.size() - 1);
    }
    const auto micro = simulate(fam, u_skip, SimulationOptions{T - out.t_skip, dt, sample_interval, false, 1e6});
    const auto macro = simulate_macro(model, project(u_skip, split.Z0), T - out.t_skip, dt, sample_interval);
    out.macro_filtered = macro.filtered;
    std::vector<double> fx, fy;
    for (size_t j = 0; j < micro.frames.size(); ++j) {
        const MatrixXd U = split.Z0.transpose() * micro.frames[j];
        const double den = U.norm();
        const double num = (U - macro.frames[j]).norm();
        const double e = den > 0 ? num / den : num;
        out.times.push_back(micro.times[j]);
        out.errors.push_back(e);
        out.max_error = std::max(out.max_error, e);
        if (e <= 0.1) {
            fx.push_back(micro.times[j] - out.t_skip);
            fy.push_back(e);
        }
    }
    out.rate_samples = static_cast<int>(fx.size());
    out.rate = detail::line_fit(fx, fy).first;
    return out;
}

struct ClosureResult {
    std::vector<double> times;          // interior sample times
    std::vector<MatrixXd> rho;          // m x points per time
    std::vector<double> rho_norms;
    double rho_norm = 0.0;
    double dudt_norm = 0.0;
    double ratio = 0.0;                 // rho_norm / dudt_norm
};

/// rho = d<Z0,u>/dt - sum_n A_n d^n<Z0,u>/dx^n from sampled microscale data;
/// fourth-order centred differences in time, spectral in space.
inline ClosureResult closure_residual(const Trajectory& micro, const ReducedModel<double>& model,
                                      const SpectralSplit<double>& split)
{
    const size_t n = micro.frames.size();
    if (n < 5)
        fail(ErrorKind::InvalidArgument, "closure residual needs at least five samples");
    const double h = micro.times[1] - micro.times[0];
    for (size_t j = 1; j < n; ++j)
        if (std::abs(micro.times[j] - micro.times[j - 1] - h) > 1e-9 * std::max(1.0, h))
            fail(ErrorKind::InvalidArgument, "closure residual needs uniformly spaced samples");
    const SpectralPropagator prop(model_family(model), micro.grid, false);
    std::vector<MatrixXd> U(n);
    for (size_t j = 0; j < n; ++j)
        U[j] = split.Z0.transpose() * micro.frames[j];
    ClosureResult out;
    double r2 = 0, d2 = 0;
    for (size_t j = 2; j + 2 < n; ++j) {
        const MatrixXd dudt = (-U[j + 2] + 8.0 * U[j + 1] - 8.0 * U[j - 1] + U[j - 2]) / (12.0 * h);
        MatrixXd rho = dudt - prop.apply(U[j]);
        r2 += rho.squaredNorm();
        d2 += dudt.squaredNorm();
        out.times.push_back(micro.times[j]);
        out.rho_norms.push_back(rho.norm());
        out.rho.push_back(std::move(rho));
    }
    out.rho_norm = std::sqrt(r2);
    out.dudt_norm = std::sqrt(d2);
    out.ratio = out.dudt_norm > 0 ? out.rho_norm / out.dudt_norm : out.rho_norm;
    return out;
}

struct DecayFit {
    double rate = 0.0;
    int samples = 0;
    double efoldings = 0.0;
    double slowest_stable_rate = 0.0;   // beta, the observable target
};

/// Fits ||(I - V0 Z0^T) u(t)|| ~ C exp(-rate t) by least squares on the log,
/// using samples until the signal reaches `floor_rel` times the field norm.
inline DecayFit decay_rate_fit(const Trajectory& micro, const SpectralSplit<double>& split, double floor_rel = 1e-10)
{
    if (micro.frames.empty())
        fail(ErrorKind::InvalidArgument, "empty trajectory");
    const MatrixXd P = MatrixXd::Identity(split.V0.rows(), split.V0.rows()) - split.V0 * split.Z0.transpose();
    double scale = 0.0;
    for (const auto& f : micro.frames)
        scale = std::max(scale, f.norm());
    const double floor = floor_rel * scale + std::numeric_limits<double>::min();
    std::vector<double> t, logs;
    for (size_t j = 0; j < micro.frames.size(); ++j) {
        const double s = (P * micro.frames[j]).norm();
        if (!(s > floor))
            break;
        t.push_back(micro.times[j]);
        logs.push_back(std::log(s));
    }
    DecayFit out;
    out.slowest_stable_rate = split.beta;
    out.samples = static_cast<int>(t.size());
    out.efoldings = t.size() >= 2 ? logs.front() - logs.back() : 0.0;
    if (t.size() < 3 || out.efoldings < 3.0)
        fail(ErrorKind::InsufficientDecay, "stable component reached the noise floor after " +
                                               ScalarTraits<double>::format(out.efoldings) + " e-foldings");
    out.rate = -detail::line_fit(t, logs).first;
    return out;
}

struct OrderStudy {
    int order = 0;
    std::vector<double> wavelengths;
    std::vector<double> kappas;
    std::vector<double> errors;      // emergence error rate per wavelength
    std::vector<double> max_errors;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double lower = 0.0, upper = 0.0;
    bool degenerate = false;
    bool passed = false;
};

struct OrderStudyOptions {
    double T = 200.0;
    int points = 32;
    bool constant_profile = false;   // x-independent initial data
    double sample_interval = 1.0;
    double floor = 1e-10;
};

/// Emergence error rate against wavenumber 2 pi / L for each wavelength;
/// the log-log slope should be N + 1.
inline OrderStudy order_study(const OperatorFamily<double>& fam, const ReducedModel<double>& model,
                              const SpectralSplit<double>& split, const std::vector<double>& wavelengths,
                              const OrderStudyOptions& opt = {})
{
    if (wavelengths.size() < 2)
        fail(ErrorKind::InvalidArgument, "order study needs at least two wavelengths");
    OrderStudy out;
    out.order = model.order;
    out.lower = model.order + 0.5;
    out.upper = model.order + 1.5;
    const VectorXd shape = split.V0 * VectorXd::Ones(split.m);
    for (double L : wavelengths) {
        std::vector<int> sizes(static_cast<size_t>(fam.dims()), 1);
        std::vector<double> lengths(static_cast<size_t>(fam.dims()), 1.0);
        sizes[0] = opt.points;
        lengths[0] = L;
        const Grid grid(sizes, lengths);
        const auto u0 = make_field(grid, fam.dim_u(), [&](const std::vector<double>& x) -> VectorXd {
            return opt.constant_profile ? VectorXd(shape) : VectorXd(shape * std::sin(2.0 * std::numbers::pi * x[0] / L));
        });
        const auto e = emergence_error(fam, model, split, u0, opt.T, std::nullopt, opt.sample_interval);
        out.wavelengths.push_back(L);
        out.kappas.push_back(2.0 * std::numbers::pi / L);
        out.errors.push_back(std::abs(e.rate));
        out.max_errors.push_back(e.max_error);
    }
    out.degenerate = std::all_of(out.max_errors.begin(), out.max_errors.end(), [&](double e) { return e <= opt.floor; });
    if (out.degenerate) {
        out.passed = true;
        return out;
    }
    std::vector<double> lx, ly;
    for (size_t i = 0; i < out.errors.size(); ++i) {
        lx.push_back(std::log(out.kappas[i]));
        ly.push_back(std::log(std::max(out.errors[i], std::numeric_limits<double>::min())));
    }
    out.slope = detail::line_fit(lx, ly).first;
    out.passed = out.slope >= out.lower && out.slope <= out.upper;
    return out;
}

} // namespace slowvary
