#include "fmgeig/harness.hpp"

#include "fmgeig/errors.hpp"
#include "fmgeig/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

namespace fmgeig {

namespace {

bool is_simple(const std::vector<double>& values, std::size_t j) {
    const double tol = 1e-12 * values[j];
    if (j > 0 && std::abs(values[j] - values[j - 1]) <= tol)
        return false;
    if (j + 1 < values.size() && std::abs(values[j + 1] - values[j]) <= tol)
        return false;
    return true;
}

} // namespace

ModelExactData model_exact_data(std::size_t q) {
    // Enumerate enough modes that the first q by eigenvalue are all present:
    // every mode with i^2 + j^2 <= bound has i, j <= sqrt(bound).
    std::vector<std::pair<int, int>> modes;
    int n = 1;
    while (true) {
        modes.clear();
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                modes.emplace_back(i, j);
        std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
            const int ka = a.first * a.first + a.second * a.second;
            const int kb = b.first * b.first + b.second * b.second;
            return ka != kb ? ka < kb : a.first < b.first;
        });
        if (modes.size() >= q) {
            const auto& last = modes[q - 1];
            const int bound = last.first * last.first + last.second * last.second;
            if ((n + 1) * (n + 1) + 1 > bound)
                break;
        }
        ++n;
    }
    modes.resize(q);

    constexpr double pi = std::numbers::pi;
    ModelExactData data;
    data.modes = modes;
    for (const auto& [i, j] : modes) {
        data.eigenvalues.push_back(static_cast<double>(i * i + j * j) * pi * pi);
        const double a = i * pi;
        const double b = j * pi;
        data.eigenfunctions.push_back(
            {[a, b](const Point& p) { return 2.0 * std::sin(a * p.x) * std::sin(b * p.y); },
             [a, b](const Point& p) {
                 return Point{2.0 * a * std::cos(a * p.x) * std::sin(b * p.y),
                              2.0 * b * std::sin(a * p.x) * std::cos(b * p.y)};
             }});
    }
    return data;
}

ProblemSpec make_problem(ProblemKind kind, std::size_t q) {
    ProblemSpec spec;
    spec.kind = kind;
    if (kind == ProblemKind::Model) {
        spec.name = "model";
        spec.coeff = CoefficientField::laplace();
        // One extra mode shows whether the q-th eigenvalue is repeated.
        ModelExactData data = model_exact_data(q + 1);
        for (std::size_t j = 0; j < q; ++j)
            spec.simple.push_back(is_simple(data.eigenvalues, j));
        data.eigenvalues.resize(q);
        data.eigenfunctions.resize(q);
        spec.exact_eigenvalues = std::move(data.eigenvalues);
        spec.eigenfunctions = std::move(data.eigenfunctions);
    } else {
        spec.name = "general";
        spec.coeff = CoefficientField::variable();
    }
    return spec;
}

namespace {

// Symmetric 7-point rule, exact for degree 5; weights relative to the area.
struct QuadPoint {
    double l0, l1, l2, w;
};
constexpr double kA1 = 0.059715871789769820, kB1 = 0.470142064105115090;
constexpr double kA2 = 0.797426985353087322, kB2 = 0.101286507323456339;
constexpr double kW1 = 0.132394152788506181, kW2 = 0.125939180544827153;
constexpr QuadPoint kQuad7[7] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {kA1, kB1, kB1, kW1}, {kB1, kA1, kB1, kW1}, {kB1, kB1, kA1, kW1},
    {kA2, kB2, kB2, kW2}, {kB2, kA2, kB2, kW2}, {kB2, kB2, kA2, kW2},
};

double aligned_sign(const Vector& interp, std::span<const double> uh, const SparseMatrix& mass) {
    return kernels::dot(spmv(mass, interp), uh) < 0.0 ? -1.0 : 1.0;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string{};
}

} // namespace

double exact_energy_error(const Mesh& mesh, const DofMap& dofs, const CoefficientField& coeff,
                          const ExactEigenfunction& u, std::span<const double> uh,
                          const SparseMatrix& mass) {
    const double sign = aligned_sign(interpolate(mesh, dofs, u.value), uh, mass);
    const Vector values = to_vertex_values(dofs, uh);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto c = mesh.corners(t);
        const auto& tri = mesh.triangles()[t];
        const double area = signed_area(c[0], c[1], c[2]);
        const double v[3] = {sign * values[tri[0]], sign * values[tri[1]], sign * values[tri[2]]};
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Point& a = c[(i + 1) % 3];
            const Point& b = c[(i + 2) % 3];
            gx += v[i] * (a.y - b.y) / (2.0 * area);
            gy += v[i] * (b.x - a.x) / (2.0 * area);
        }
        double local = 0.0;
        for (const auto& qp : kQuad7) {
            const Point x{qp.l0 * c[0].x + qp.l1 * c[1].x + qp.l2 * c[2].x,
                          qp.l0 * c[0].y + qp.l1 * c[1].y + qp.l2 * c[2].y};
            const Point gu = u.gradient(x);
            const double ex = gu.x - gx;
            const double ey = gu.y - gy;
            const Sym2 a = coeff.diffusion(x);
            const double e = u.value(x) - (qp.l0 * v[0] + qp.l1 * v[1] + qp.l2 * v[2]);
            local += qp.w * (ex * (a.xx * ex + a.xy * ey) + ey * (a.xy * ex + a.yy * ey) +
                             coeff.reaction(x) * e * e);
        }
        sum += area * local;
    }
    return std::sqrt(std::max(sum, 0.0));
}

StudyRow compute_errors(const EigenApprox& approx, const ProblemSpec& spec,
                        const MeshHierarchy& hierarchy, const MGContext& ctx,
                        const std::vector<double>* reference) {
    const std::size_t k = approx.level;
    if (k >= hierarchy.n_levels() || k >= ctx.n_levels())
        throw InvalidArgument("compute_errors: approximation level outside the hierarchy");
    const std::size_t q = approx.size();
    StudyRow row;
    row.level = k + 1;
    row.n_dofs = ctx.n_dofs(k);
    row.lambda_h = approx.eigenvalues;
    row.lambda_ref.assign(q, std::nullopt);
    row.abs_err.assign(q, std::nullopt);
    row.energy_err.assign(q, std::nullopt);

    const std::vector<double>* ref = reference;
    if (!ref && !spec.exact_eigenvalues.empty())
        ref = &spec.exact_eigenvalues;
    if (ref) {
        for (std::size_t j = 0; j < q && j < ref->size(); ++j) {
            row.lambda_ref[j] = (*ref)[j];
            row.abs_err[j] = std::abs((*ref)[j] - approx.eigenvalues[j]);
        }
    }
    const Mesh& mesh = hierarchy.meshes[k];
    for (std::size_t j = 0; j < q && j < spec.eigenfunctions.size(); ++j) {
        if (j >= spec.simple.size() || !spec.simple[j])
            continue;
        Vector interp = interpolate(mesh, ctx.dofs(k), spec.eigenfunctions[j].value);
        const double sign = aligned_sign(interp, approx.vectors[j], ctx.mass(k));
        for (std::size_t i = 0; i < interp.size(); ++i)
            interp[i] -= sign * approx.vectors[j][i];
        row.energy_err[j] = norm_a(ctx.stiffness(k), interp);
    }
    return row;
}

double extrapolate_reference(double lambda_coarse, double lambda_fine, double beta, double order) {
    if (!(beta > 1.0) || !(order > 0.0))
        throw InvalidArgument("extrapolate_reference: need beta > 1 and order > 0");
    return lambda_fine + (lambda_fine - lambda_coarse) / (std::pow(beta, order) - 1.0);
}

std::vector<StudyRow> run_study(const StudyOptions& options) {
    const SolverConfig& config = options.config;
    config.validate();
    const MeshHierarchy hierarchy = build_hierarchy(options.initial_mesh, options.n_levels,
                                                    kDefaultVertexCap, config.coarse_index);
    const ProblemSpec spec = make_problem(options.problem, config.q);
    const MGContext ctx = build_mg_context(hierarchy, spec.coeff, config.cycle_settings());
    using clock = std::chrono::steady_clock;
    auto elapsed_ms = [&](clock::time_point start) {
        return options.record_timing
                   ? std::chrono::duration<double, std::milli>(clock::now() - start).count()
                   : 0.0;
    };

    struct LevelResult {
        EigenApprox approx;
        std::uint64_t work = 0;
        double wall_ms = 0.0;
    };
    std::vector<LevelResult> fmg;
    const auto fmg_start = clock::now();
    full_multigrid(ctx, hierarchy, config, [&](const EigenApprox& a, const WorkCounter& w) {
        fmg.push_back({a, w.total(), elapsed_ms(fmg_start)});
    });

    const std::size_t first = config.initial_level;
    const std::size_t last = hierarchy.n_levels() - 1;
    std::vector<std::optional<LevelResult>> direct(hierarchy.n_levels());
    auto run_direct = [&](std::size_t k) {
        if (direct[k])
            return;
        WorkCounter w;
        const auto start = clock::now();
        EigenApprox a = direct_fine_solve(ctx, hierarchy, config.q, options.direct_tol, k, &w);
        direct[k] = LevelResult{std::move(a), w.total(), elapsed_ms(start)};
    };
    if (options.compare_direct)
        for (std::size_t k = first; k <= last; ++k)
            run_direct(k);

    std::optional<std::vector<double>> reference;
    if (options.problem == ProblemKind::General && last > first) {
        run_direct(last - 1);
        run_direct(last);
        reference.emplace(config.q);
        for (std::size_t j = 0; j < config.q; ++j)
            (*reference)[j] = extrapolate_reference(direct[last - 1]->approx.eigenvalues[j],
                                                    direct[last]->approx.eigenvalues[j],
                                                    hierarchy.beta, 2.0);
    }
    const std::vector<double>* ref = reference ? &*reference : nullptr;

    std::vector<StudyRow> rows;
    for (const auto& r : fmg) {
        StudyRow row = compute_errors(r.approx, spec, hierarchy, ctx, ref);
        row.method = "fmg";
        row.work_units = r.work;
        row.wall_ms = r.wall_ms;
        rows.push_back(std::move(row));
    }
    if (options.compare_direct) {
        for (std::size_t k = first; k <= last; ++k) {
            StudyRow row = compute_errors(direct[k]->approx, spec, hierarchy, ctx, ref);
            row.method = "direct";
            row.work_units = direct[k]->work;
            row.wall_ms = direct[k]->wall_ms;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_csv(const std::vector<StudyRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.lambda_h.size(); ++j) {
            out << row.method << ',' << row.level << ',' << row.n_dofs << ',' << j + 1 << ','
                << format_number(row.lambda_h[j]) << ','
                << format_optional(j < row.lambda_ref.size() ? row.lambda_ref[j] : std::nullopt)
                << ','
                << format_optional(j < row.abs_err.size() ? row.abs_err[j] : std::nullopt) << ','
                << format_optional(j < row.energy_err.size() ? row.energy_err[j] : std::nullopt)
                << ',' << row.work_units << ',' << format_number(row.wall_ms) << '\n';
        }
    }
}

void write_csv_file(const std::vector<StudyRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    write_csv(rows, out);
    out.flush();
    if (!out)
        throw IoError("write failed for " + path.string());
}

} // namespace fmgeig
