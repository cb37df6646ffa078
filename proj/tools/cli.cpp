#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "slowvary/slowvary.hpp"

namespace slowvary::cli {

namespace {

namespace fs = std::filesystem;
using json = io::json;

constexpr const char* kVersion = "0.1.0";
constexpr double kBlockCheckLimit = 2000;  // largest N_count * dimU for the dense block checks

struct Loaded {
    std::string name;
    OperatorFamily<double> fam;
    std::optional<OperatorFamily<Rational>> exact;
    std::optional<CellProblem> cell;
};

int exit_code_for(ErrorKind kind)
{
    if (is_assumption_violation(kind))
        return 2;
    switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::ExactModeUnsupported:
        return 1;
    default:
        return 3;
    }
}

std::vector<int> parse_int_list(const std::string& text, char sep)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        try {
            size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "malformed integer list '" + text + "'");
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        out.push_back(Rational::parse(tok).to_double());
    return out;
}

int cell_grid(const RunConfig& c, int fallback)
{
    if (c.grid.empty())
        return fallback;
    const auto v = parse_int_list(c.grid, 'x');
    if (v.size() != 1)
        fail(ErrorKind::InvalidArgument, "cell grid takes a single size, e.g. --grid 64");
    return v[0];
}

Loaded load_model(const RunConfig& c, const std::string& name)
{
    Loaded l;
    l.name = name;
    if (name == "walker-modal") {
        l.exact = random_walker_modal();
    } else if (name == "walker-physical") {
        l.exact = random_walker_physical();
    } else if (name == "homogenise-constant") {
        l.cell = make_cell("constant", {{"K0", c.k0}}, cell_grid(c, 32));
    } else if (name == "homogenise-layered") {
        l.cell = make_cell("layered_cos", {{"K0", c.k0}, {"a", c.a}}, cell_grid(c, 32));
    } else if (name == "homogenise-checkerboard") {
        l.cell = make_cell("checkerboard_smooth", {{"K0", c.k0}, {"a", c.a}}, cell_grid(c, 32));
    } else if (fs::exists(name)) {
        const json j = io::read_json_file(name);
        if (io::is_cell_spec(j))
            l.cell = io::cell_from_json(j);
        else
            l.fam = io::family_from_json(j);
    } else {
        fail(ErrorKind::InvalidArgument, "unknown model '" + name +
                                             "' (built-ins: walker-modal, walker-physical, homogenise-constant, "
                                             "homogenise-layered, homogenise-checkerboard; or a JSON spec path)");
    }
    if (l.exact)
        l.fam = l.exact->to_double();
    if (l.cell)
        l.fam = homogenisation_cell(*l.cell);
    return l;
}

void require_exact_ok(const RunConfig& c, const Loaded& l)
{
    if (!c.exact)
        return;
    if (!l.exact)
        fail(ErrorKind::ExactModeUnsupported, "--exact is limited to the built-in walker models");
    if (l.exact->dim_u() > 8)
        fail(ErrorKind::ExactModeUnsupported, "--exact is limited to dimU <= 8");
}

json complex_list(const VectorXc& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(json::array({io::number(v(i).real()), io::number(v(i).imag())}));
    return out;
}

struct Checks {
    json list = json::array();
    std::vector<std::string> failures;

    void add(const std::string& name, double value, double tolerance, bool passed)
    {
        json j;
        j["name"] = name;
        j["value"] = io::number(value);
        j["tolerance"] = io::number(tolerance);
        j["passed"] = passed;
        list.push_back(std::move(j));
        if (!passed)
            failures.push_back(name);
    }

    void add_le(const std::string& name, double value, double tolerance) { add(name, value, tolerance, value <= tolerance); }
    bool ok() const { return failures.empty(); }
};

template <class T>
json split_json(const SpectralSplit<T>& s)
{
    json j;
    j["m"] = s.m;
    j["alpha"] = io::number(s.alpha);
    j["beta"] = io::number(s.beta);
    j["symmetric_path"] = s.symmetric;
    if (s.V0.rows() <= 64) {
        j["V0"] = io::matrix_to_json(s.V0);
        j["Z0"] = io::matrix_to_json(s.Z0);
        j["eigenvalues"] = complex_list(s.eigenvalues);
    } else {
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
            if (std::abs(s.eigenvalues(i).real()) > s.alpha + 1e-300)
                top = std::max(top, s.eigenvalues(i).real());
        j["largest_stable_eigenvalue"] = io::number(top);
        j["eigenvalue_count"] = s.eigenvalues.size();
    }
    return j;
}

json validation_json(const ValidationReport& r)
{
    json j;
    j["gap_margin"] = io::number(r.gap_margin);
    j["binormalisation_residual"] = r.binormalisation_residual;
    j["invariance_residual"] = r.invariance_residual;
    j["invariance_scale"] = r.invariance_scale;
    j["trace_residual"] = r.trace_residual;
    json support = json::array();
    for (const auto& k : r.support)
        support.push_back(k.str());
    j["support"] = std::move(support);
    j["passed"] = r.passed;
    return j;
}

void add_validation_checks(Checks& checks, const ValidationReport& r, double tol, int dim_u)
{
    checks.add("gap", r.gap_margin, 0.0, r.gap_margin > 0);
    checks.add_le("binormalisation", r.binormalisation_residual, tol);
    checks.add_le("centre_invariance", r.invariance_residual, tol * std::max(r.invariance_scale, 1.0));
    checks.add_le("eigenvalue_trace", r.trace_residual, tol * dim_u * std::max(r.invariance_scale, 1.0));
}

json cell_json(const CellProblem& cell, double beta)
{
    json j = io::cell_to_json(cell);
    if (j.contains("K"))
        j.erase("K");
    j["k_min"] = cell.k_min();
    j["harmonic_mean"] = cell.harmonic_mean();
    j["arithmetic_mean"] = cell.arithmetic_mean();
    j["gap_bound"] = 4.0 * std::numbers::pi * std::numbers::pi * cell.k_min() / (cell.h * cell.h);
    j["gap_ratio"] = io::number(gap_ratio(beta, cell));
    return j;
}

// ---- PDE pretty-printing ---------------------------------------------------

std::string unicode_minus(std::string s)
{
    if (!s.empty() && s[0] == '-')
        s = "−" + s.substr(1);
    return s;
}

/// p/q with q <= 10^4 when it reproduces x to 1e-12, else %.6g.
std::string pretty_number(double x)
{
    const double ax = std::abs(x);
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double r = ax;
    for (int it = 0; it < 40; ++it) {
        const double a = std::floor(r);
        const long long p2 = static_cast<long long>(a) * p1 + p0;
        const long long q2 = static_cast<long long>(a) * q1 + q0;
        if (q2 > 10000)
            break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - ax) <= 1e-12 * std::max(1.0, ax)) {
            std::string s = q1 == 1 ? std::to_string(p1) : std::to_string(p1) + "/" + std::to_string(q1);
            return x < 0 ? "-" + s : s;
        }
        const double frac = r - a;
        if (frac < 1e-15)
            break;
        r = 1.0 / frac;
    }
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

std::string derivative_label(const MultiIndex& n)
{
    static const char* names[] = {"x", "y", "z"};
    std::string s = "∂";
    for (int d = 0; d < n.dims(); ++d)
        for (int e = 0; e < n[d]; ++e)
            s += n.dims() <= 3 ? std::string(names[d]) : "x" + std::to_string(d + 1);
    return s;
}

/// "∂t U = −1/3 ∂x U + 8/27 ∂xx U + ..." for scalar models; one line per
/// coefficient matrix otherwise.
template <class T>
std::string pde_string(const ReducedModel<T>& model)
{
    std::ostringstream os;
    if (model.m == 1) {
        double scale = 0.0;
        for (const auto& [n, a] : model.coeffs)
            scale = std::max(scale, std::abs(ScalarTraits<T>::to_double(a(0, 0))));
        os << "∂t U =";
        bool first = true;
        for (const auto& [n, a] : model.coeffs) {
            const T& v = a(0, 0);
            const double vd = ScalarTraits<T>::to_double(v);
            if constexpr (ScalarTraits<T>::exact) {
                if (v == T(0))
                    continue;
            } else {
                if (std::abs(vd) <= 1e-10 * std::max(scale, 1e-300))
                    continue;
            }
            std::string mag;
            if constexpr (ScalarTraits<T>::exact)
                mag = abs(v).str();
            else
                mag = pretty_number(std::abs(vd));
            if (first)
                os << ' ' << (vd < 0 ? "−" : "") << mag;
            else
                os << (vd < 0 ? " − " : " + ") << mag;
            os << (n.is_zero() ? " U" : " " + derivative_label(n) + " U");
            first = false;
        }
        if (first)
            os << " 0";
        return os.str();
    }
    os << "∂t U = sum_n A_n ∂^n U with";
    for (const auto& [n, a] : model.coeffs) {
        os << "\n  A_(" << n.str() << ") = [";
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            os << (i ? "; " : "");
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                os << (j ? " " : "") << unicode_minus(ScalarTraits<T>::format(a(i, j)));
        }
        os << "]";
    }
    return os.str();
}

// ---- reduce / validate -----------------------------------------------------

template <class T>
SpectralSplit<T> make_split(const OperatorFamily<T>& fam, const RunConfig& c)
{
    if constexpr (ScalarTraits<T>::exact)
        return spectral_split_exact(fam.base(), c.alpha, c.order);
    else
        return spectral_split(fam.base(), c.alpha, c.order);
}

template <class T>
double coefficient_difference(const ReducedModel<T>& a, const ReducedModel<T>& b)
{
    double worst = 0.0;
    for (const auto& [n, coeff] : a.coeffs)
        worst = std::max(worst, max_abs(Matrix<T>(coeff - b.A(n))));
    return worst;
}

template <class T>
double coefficient_scale(const ReducedModel<T>& a)
{
    double s = 0.0;
    for (const auto& [n, coeff] : a.coeffs)
        s = std::max(s, max_abs(coeff));
    return s;
}

struct ReduceOutputs {
    ReducedModel<double> model;
    SpectralSplit<double> split;
    std::string pde;
};

template <class T>
ReduceOutputs reduce_pipeline(const OperatorFamily<T>& fam, const RunConfig& c, const Loaded& loaded, json& report,
                              Checks& checks, const fs::path& out_dir, bool full)
{
    const bool exact = ScalarTraits<T>::exact;
    const double tol = c.tol;
    const auto split = make_split(fam, c);
    report["split"] = split_json(split);
    const auto validation = validate_family(fam, split, c.order, tol);
    report["validation"] = validation_json(validation);
    add_validation_checks(checks, validation, tol, fam.dim_u());
    if (loaded.cell) {
        report["cell"] = cell_json(*loaded.cell, split.beta);
        report["cell"]["note"] = "inner product uses uniform cell weights: Z0 = 1/n^2, V0 = 1";
    }

    ReduceOutputs outputs;
    outputs.split.m = split.m;
    outputs.split.alpha = split.alpha;
    outputs.split.beta = split.beta;
    outputs.split.eigenvalues = split.eigenvalues;
    outputs.split.V0 = to_double(split.V0);
    outputs.split.Z0 = to_double(split.Z0);
    if (!full)
        return outputs;

    const auto result = construct_reduction(fam, split, c.order, ReductionOptions{tol, 0, std::nullopt});
    const json model_json = io::model_to_json(result.model);
    report["A"] = model_json["A"];
    outputs.model = result.model.to_double();
    outputs.pde = pde_string(result.model);
    report["pde"] = outputs.pde;

    // Orthogonality of the higher-order basis.
    double ortho = 0.0;
    for (const auto& [n, v] : result.basis.vectors)
        if (!n.is_zero())
            ortho = std::max(ortho, max_abs(Matrix<T>(split.Z0.transpose() * v)));
    checks.add_le("basis_orthogonality", ortho, exact ? 0.0 : tol);

    const auto inv = check_invariance(fam, result.model, result.basis);
    const double inv_scale = 1.0 + to_double(fam.base()).cwiseAbs().maxCoeff();
    checks.add_le("invariance_identity", inv.max_residual, exact ? 0.0 : tol * inv_scale);

    const auto direct = construct_reduction_direct(fam, split, c.order, tol);
    const double diff = coefficient_difference(result.model, direct.model);
    checks.add_le("direct_route_agreement", diff, exact ? 0.0 : tol * (1.0 + coefficient_scale(result.model)));

    const IndexTable table(fam.dims(), c.order);
    const Matrix<T> blockA = build_block_A(result.model);
    io::write_text_file(out_dir / "block_A.csv", io::block_matrix_csv(blockA, table, split.m));

    json block;
    const double size = static_cast<double>(table.size()) * fam.dim_u();
    if (size <= kBlockCheckLimit) {
        block["checked"] = true;
        const auto op = build_block_operator(fam, c.order);
        io::write_text_file(out_dir / "block_operator.csv", io::block_matrix_csv(op.matrix, table, fam.dim_u()));
        if constexpr (ScalarTraits<T>::exact) {
            const bool same = block_spectrum_check_exact(op.matrix, fam.base());
            block["characteristic_polynomial_match"] = same;
            checks.add("block_spectrum", same ? 0.0 : 1.0, 0.0, same);
        } else {
            const auto spec = block_spectrum_check(op.matrix, fam.base());
            block["copies"] = spec.copies;
            block["counts_match"] = spec.counts_match;
            block["max_cluster_error"] = spec.max_cluster_error;
            block["max_pair_distance"] = spec.max_pair_distance;
            checks.add("block_spectrum", spec.max_cluster_error, 1e-6, spec.passed);
        }
        const double slow = verify_slow_subspace(op, result.basis, blockA);
        block["slow_subspace_residual"] = slow;
        checks.add_le("slow_subspace", slow, exact ? 0.0 : tol * inv_scale);
    } else {
        block["checked"] = false;
        block["reason"] = "block operator of size " + std::to_string(static_cast<long long>(size)) +
                          " exceeds the dense-check limit " + std::to_string(static_cast<int>(kBlockCheckLimit));
    }
    report["block"] = std::move(block);

    json residuals;
    residuals["invariance"] = inv.max_residual;
    residuals["direct_route_difference"] = diff;
    residuals["max_sylvester_residual"] = result.max_solve_residual;
    residuals["basis_orthogonality"] = ortho;
    report["residuals"] = std::move(residuals);

    if (loaded.cell && split.m == 1) {
        const double a20 = ScalarTraits<T>::to_double(result.model.A(MultiIndex{2, 0})(0, 0));
        const double a02 = ScalarTraits<T>::to_double(result.model.A(MultiIndex{0, 2})(0, 0));
        const double harm = loaded.cell->harmonic_mean(), arith = loaded.cell->arithmetic_mean();
        report["cell"]["voigt_reuss_bracket"] =
            harm <= a20 * (1 + 1e-9) && a20 <= arith * (1 + 1e-9) && harm <= a02 * (1 + 1e-9) && a02 <= arith * (1 + 1e-9);
    }

    io::write_json_file(out_dir / "model.json", model_json);
    io::write_json_file(out_dir / "basis.json", io::basis_to_json(result.basis, c.order, fam.dims()));
    return outputs;
}

json base_report(const RunConfig& c, const std::string& command)
{
    json r;
    r["command"] = command;
    r["model"] = c.model;
    r["N"] = c.order;
    r["arithmetic"] = c.exact ? "rational" : "double";
    if (c.alpha)
        r["alpha_requested"] = *c.alpha;
    r["tol"] = c.tol;
    return r;
}

void finish_report(json& report, const Checks& checks)
{
    report["checks"] = checks.list;
    report["failures"] = checks.failures;
    report["status"] = checks.ok() ? "passed" : "failed";
}

int cmd_reduce_or_validate(const RunConfig& c, std::ostream& out, json& report, const fs::path& dir, bool full)
{
    const Loaded loaded = load_model(c, c.model);
    require_exact_ok(c, loaded);
    report["dimU"] = loaded.fam.dim_u();
    report["M"] = loaded.fam.dims();
    Checks checks;
    ReduceOutputs r;
    if (c.exact)
        r = reduce_pipeline(*loaded.exact, c, loaded, report, checks, dir, full);
    else
        r = reduce_pipeline(loaded.fam, c, loaded, report, checks, dir, full);
    finish_report(report, checks);
    if (full)
        out << r.pde << "\n";
    for (const auto& f : checks.failures)
        out << "check failed: " << f << "\n";
    out << (checks.ok() ? "all checks passed" : "some checks failed") << "\n";
    return checks.ok() ? 0 : 3;
}

// ---- simulate / converge ---------------------------------------------------

Grid simulation_grid(const RunConfig& c, int dims)
{
    std::vector<int> sizes(static_cast<size_t>(dims), 1);
    if (!c.grid.empty()) {
        const auto g = parse_int_list(c.grid, 'x');
        if (g.size() > sizes.size())
            fail(ErrorKind::InvalidArgument, "grid has more entries than M");
        std::copy(g.begin(), g.end(), sizes.begin());
    } else {
        sizes[0] = 64;
    }
    std::vector<double> lengths(static_cast<size_t>(dims), 1.0);
    if (!c.length.empty()) {
        const auto l = parse_double_list(c.length);
        if (l.size() > lengths.size())
            fail(ErrorKind::InvalidArgument, "length has more entries than M");
        std::copy(l.begin(), l.end(), lengths.begin());
    } else {
        for (size_t d = 0; d < sizes.size(); ++d)
            lengths[d] = sizes[d] > 1 ? 64.0 : 1.0;
    }
    return Grid(sizes, lengths);
}

struct FloatReduction {
    Loaded loaded;
    SpectralSplit<double> split;
    ReducedModel<double> model;
};

FloatReduction float_reduction(const RunConfig& c)
{
    FloatReduction f{load_model(c, c.model), {}, {}};
    f.split = spectral_split(f.loaded.fam.base(), c.alpha, c.order);
    f.model = construct_reduction(f.loaded.fam, f.split, c.order, ReductionOptions{c.tol, 0, std::nullopt}).model;
    return f;
}

json trajectory_info(const Trajectory& t)
{
    json j;
    j["dt"] = t.dt;
    j["steps"] = t.steps;
    j["samples"] = t.frames.size();
    j["filtered_top_third"] = t.filtered;
    j["symbol_max_rate"] = io::number(t.preflight.max_rate);
    j["symbol_abscissa"] = io::number(t.preflight.abscissa);
    j["preflight"] = t.preflight.eigen_based ? "eigenvalues" : "norm bound";
    return j;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, json& report, const fs::path& dir)
{
    const auto f = float_reduction(c);
    const auto& fam = f.loaded.fam;
    const Grid grid = simulation_grid(c, fam.dims());
    if (static_cast<double>(grid.points()) * fam.dim_u() > static_cast<double>(1 << 20))
        fail(ErrorKind::InvalidArgument, "grid points x dimU exceeds the 2^20 state cap");
    report["dimU"] = fam.dim_u();
    report["grid"] = grid.sizes;
    report["lengths"] = grid.lengths;
    report["T"] = c.T;
    report["seed"] = c.seed;
    report["split"] = split_json(f.split);
    report["A"] = io::model_to_json(f.model)["A"];

    std::mt19937 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd r(fam.dim_u());
    for (Eigen::Index i = 0; i < r.size(); ++i)
        r(i) = normal(rng);
    const MatrixXd P = MatrixXd::Identity(fam.dim_u(), fam.dim_u()) - f.split.V0 * f.split.Z0.transpose();
    const VectorXd fast = 0.5 * P * r;
    const VectorXd slow = f.split.V0 * VectorXd::Ones(f.split.m);
    const double L1 = grid.lengths[0];
    const auto u0 = make_field(grid, fam.dim_u(), [&](const std::vector<double>& x) -> VectorXd {
        const double phase = 2.0 * std::numbers::pi * x[0] / L1;
        return slow * std::sin(phase) + fast * std::cos(phase);
    });

    const auto traj = simulate_micro(fam, u0, c.T, c.dt, c.sample);
    report["micro"] = trajectory_info(traj);
    io::write_text_file(dir / "trajectory.csv", io::trajectory_csv(traj, fam.labels()));
    io::write_text_file(dir / "trajectory.bin", io::trajectory_binary(traj));

    const auto e = emergence_error(fam, f.model, f.split, u0, c.T, std::nullopt, c.sample, c.dt);
    io::write_text_file(dir / "errors.csv", io::error_csv(e));
    json em;
    em["t_skip"] = e.t_skip;
    em["error_rate"] = io::number(e.rate);
    em["error_rate_samples"] = e.rate_samples;
    em["max_error"] = e.max_error;
    em["final_error"] = e.errors.back();
    em["macro_filtered_top_third"] = e.macro_filtered;
    em["note"] = "error_rate is the least-squares slope of e(t) against t - t_skip over samples with e <= 0.1";
    report["emergence"] = std::move(em);

    // Closure residual on the post-transient microscale data.
    const size_t skip_index = static_cast<size_t>(
        std::lower_bound(traj.times.begin(), traj.times.end(), e.t_skip) - traj.times.begin());
    if (traj.frames.size() - std::min(skip_index, traj.frames.size()) >= 5) {
        Trajectory tail;
        tail.grid = traj.grid;
        tail.times.assign(traj.times.begin() + static_cast<long>(skip_index), traj.times.end());
        tail.frames.assign(traj.frames.begin() + static_cast<long>(skip_index), traj.frames.end());
        const auto cr = closure_residual(tail, f.model, f.split);
        io::write_text_file(dir / "closure.csv", io::series_csv("t", "rho_norm", cr.times, cr.rho_norms));
        json cj;
        cj["rho_norm"] = cr.rho_norm;
        cj["dUdt_norm"] = cr.dudt_norm;
        cj["ratio"] = io::number(cr.ratio);
        report["closure"] = std::move(cj);
    }

    // Decay of the stable component for x-independent data.
    json dj;
    try {
        const Grid point(std::vector<int>(static_cast<size_t>(fam.dims()), 1),
                         std::vector<double>(static_cast<size_t>(fam.dims()), 1.0));
        const auto v0 = make_field(point, fam.dim_u(), [&](const std::vector<double>&) -> VectorXd { return slow + fast; });
        const double horizon = std::isfinite(f.split.beta) ? std::min(c.T, 40.0 / f.split.beta) : c.T;
        const auto dtraj = simulate_micro(fam, v0, horizon, c.dt, horizon / 400.0);
        const auto fit = decay_rate_fit(dtraj, f.split);
        dj["rate"] = fit.rate;
        dj["efoldings"] = fit.efoldings;
        dj["samples"] = fit.samples;
        dj["slowest_stable_rate"] = io::number(fit.slowest_stable_rate);
        dj["note"] = "fit target is the slowest stable eigenvalue of L_0";
    } catch (const Error& err) {
        dj["error"] = err.what();
    }
    report["decay"] = std::move(dj);
    report["status"] = "passed";
    out << "simulated " << traj.frames.size() << " samples; emergence error rate "
        << ScalarTraits<double>::format(e.rate) << ", max error " << ScalarTraits<double>::format(e.max_error) << "\n";
    return 0;
}

int cmd_converge(const RunConfig& c, std::ostream& out, json& report, const fs::path& dir)
{
    const auto f = float_reduction(c);
    OrderStudyOptions opt;
    opt.T = c.T;
    opt.points = c.grid.empty() ? 32 : cell_grid(c, 32);
    opt.sample_interval = c.sample;
    if (c.profile != "sine" && c.profile != "constant")
        fail(ErrorKind::InvalidArgument, "profile must be 'sine' or 'constant'");
    opt.constant_profile = c.profile == "constant";
    const auto study = order_study(f.loaded.fam, f.model, f.split, c.wavelengths, opt);

    std::ostringstream csv;
    csv << "L,kappa,error_rate,max_error\n";
    for (size_t i = 0; i < study.wavelengths.size(); ++i)
        csv << ScalarTraits<double>::format(study.wavelengths[i]) << ',' << ScalarTraits<double>::format(study.kappas[i])
            << ',' << ScalarTraits<double>::format(study.errors[i]) << ','
            << ScalarTraits<double>::format(study.max_errors[i]) << '\n';
    io::write_text_file(dir / "orders.csv", csv.str());

    report["wavelengths"] = study.wavelengths;
    report["T"] = c.T;
    report["profile"] = c.profile;
    report["error_rates"] = study.errors;
    report["slope"] = io::number(study.slope);
    report["slope_bounds"] = json::array({study.lower, study.upper});
    report["degenerate"] = study.degenerate;
    report["status"] = study.passed ? "passed" : "failed";
    if (study.degenerate)
        out << "degenerate: all errors below the floor\n";
    else
        out << "log-log slope " << ScalarTraits<double>::format(study.slope) << " (expected in [" << study.lower << ", "
            << study.upper << "])\n";
    return study.passed ? 0 : 3;
}

int cmd_demo(const RunConfig& c, std::ostream& out, json& report, const fs::path& dir)
{
    report["demo"] = c.demo;
    RunConfig rc = c;
    if (c.demo == "walker") {
        rc.model = "walker-modal";
        rc.exact = true;
        json sub = base_report(rc, "reduce");
        Checks checks;
        const Loaded loaded = load_model(rc, rc.model);
        auto r2 = reduce_pipeline(*loaded.exact, rc, loaded, sub, checks, dir, true);
        RunConfig r3c = rc;
        r3c.order = 3;
        json sub3 = base_report(r3c, "reduce");
        Checks checks3;
        const fs::path dir3 = dir / "order3";
        auto r3 = reduce_pipeline(*loaded.exact, r3c, loaded, sub3, checks3, dir3, true);
        finish_report(sub3, checks3);
        io::write_json_file(dir3 / "report.json", sub3);
        out << r2.pde << "\n" << r3.pde << "\n";
        report["pde"] = r2.pde;
        report["pde_order3"] = r3.pde;
        report["A"] = sub["A"];
        report["A_order3"] = sub3["A"];
        for (const auto& f : checks3.failures)
            checks.failures.push_back("order3:" + f);
        finish_report(report, checks);
        return checks.ok() ? 0 : 3;
    }
    if (c.demo == "homogenise-constant" || c.demo == "homogenise-layered" || c.demo == "homogenise-checkerboard") {
        rc.model = c.demo;
        rc.exact = false;
        Checks checks;
        const Loaded loaded = load_model(rc, rc.model);
        auto r = reduce_pipeline(loaded.fam, rc, loaded, report, checks, dir, true);
        finish_report(report, checks);
        const double a20 = r.model.A(MultiIndex{2, 0})(0, 0), a02 = r.model.A(MultiIndex{0, 2})(0, 0);
        out << r.pde << "\n";
        out << "A_(2,0) = " << std::setprecision(10) << a20 << ", A_(0,2) = " << a02 << "\n";
        out << "harmonic mean " << loaded.cell->harmonic_mean() << ", arithmetic mean " << loaded.cell->arithmetic_mean()
            << "\n";
        return checks.ok() ? 0 : 3;
    }
    fail(ErrorKind::InvalidArgument,
         "unknown demo '" + c.demo + "' (walker, homogenise-constant, homogenise-layered, homogenise-checkerboard)");
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = c.out;
    json report = base_report(c, c.command);
    int code = 0;
    try {
        if (c.order < 1)
            fail(ErrorKind::InvalidArgument, "order must be at least 1");
        if (c.command == "reduce")
            code = cmd_reduce_or_validate(c, out, report, dir, true);
        else if (c.command == "validate")
            code = cmd_reduce_or_validate(c, out, report, dir, false);
        else if (c.command == "simulate")
            code = cmd_simulate(c, out, report, dir);
        else if (c.command == "converge")
            code = cmd_converge(c, out, report, dir);
        else if (c.command == "demo")
            code = cmd_demo(c, out, report, dir);
        else
            fail(ErrorKind::InvalidArgument, "unknown command '" + c.command + "'");
    } catch (const Error& e) {
        code = exit_code_for(e.kind());
        report["status"] = "error";
        report["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        err << e.what() << "\n";
    } catch (const std::exception& e) {
        code = 1;
        report["status"] = "error";
        report["error"] = {{"kind", "Internal"}, {"message", e.what()}};
        err << e.what() << "\n";
    }
    report["exit_code"] = code;
    try {
        io::write_json_file(dir / "report.json", report);
        json meta;
        meta["timestamp"] = utc_timestamp();
        meta["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        meta["threads"] = worker_count();
        meta["version"] = kVersion;
        io::write_json_file(dir / "metadata.json", meta);
    } catch (const std::exception& e) {
        err << "could not write report: " << e.what() << "\n";
        if (code == 0)
            code = 1;
    }
    return code;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Slowly-varying reduction of linear PDE systems to macroscale models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    RunConfig c;
    std::string wavelengths;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--model", c.model, "built-in model name or JSON spec path");
        sub->add_option("-N,--order", c.order, "truncation order N");
        sub->add_option("--alpha", c.alpha, "centre-rate bound (default 1e-9 x spectral radius)");
        sub->add_option("--tol", c.tol, "residual tolerance");
        sub->add_option("--grid", c.grid, "cell size for built-in cells, or simulation grid like 64x1");
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--a", c.a, "amplitude for built-in cell diffusivities");
        sub->add_option("--K0", c.k0, "base diffusivity for built-in cells");
        sub->add_option("--seed", c.seed, "seed for random initial content");
    };
    auto timing = [&](CLI::App* sub) {
        sub->add_option("--dt", c.dt, "time step (default 0.2 / largest symbol rate)");
        sub->add_option("--T", c.T, "end time");
        sub->add_option("--sample", c.sample, "sample interval");
    };

    auto* reduce = app.add_subcommand("reduce", "construct the macroscale model and cross-check it");
    common(reduce);
    reduce->add_flag("--exact", c.exact, "exact rational arithmetic (built-in walker models)");
    auto* validate = app.add_subcommand("validate", "check the spectral assumptions only");
    common(validate);
    validate->add_flag("--exact", c.exact, "exact rational arithmetic (built-in walker models)");
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate micro and macro models and measure emergence");
    common(simulate_cmd);
    timing(simulate_cmd);
    simulate_cmd->add_option("--length", c.length, "domain lengths, comma separated");
    auto* converge = app.add_subcommand("converge", "closure-error order study over a wavelength ladder");
    common(converge);
    timing(converge);
    converge->add_option("--wavelengths", wavelengths, "comma-separated wavelengths (default 16,32,64,128)");
    converge->add_option("--profile", c.profile, "initial profile: sine or constant");
    auto* demo = app.add_subcommand("demo", "packaged demonstrations");
    common(demo);
    demo->add_option("name", c.demo, "walker | homogenise-constant | homogenise-layered | homogenise-checkerboard")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    c.command = app.get_subcommands().front()->get_name();
    if (!wavelengths.empty()) {
        try {
            c.wavelengths = parse_double_list(wavelengths);
        } catch (const Error& e) {
            err << e.what() << "\n";
            return 1;
        }
    }
    return run(c, out, err);
}

} // namespace slowvary::cli
