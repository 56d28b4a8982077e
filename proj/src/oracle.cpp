#include "ecb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ecb {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool is_ideal_iron(const layer& l) {
    return std::isinf(l.relative_permeability);
}

// One meshed layer with everything the stencils need.
struct meshed_layer {
    double h = 0.0;               // cell width
    int cells = 0;
    std::complex<double> g2;      // squared decay coefficient in this layer
    std::complex<double> kappa;   // sqrt(g2)
    std::complex<double> p;       // flux weight mu_r a^2 / g2
    bool exact = false;           // real-coefficient branch (recurrence is exact)
};

// Flux of the discrete solution at a node, second-order accurate.
//   right flux: p u'(z_i^+) = ci * u_i + cip1 * u_{i+1}
//   left flux:  p u'(z_i^-) = cim1 * u_{i-1} + ci * u_i
// The exact branch propagates with the layer's analytic solution; the
// standard branch corrects the one-sided difference with the ODE itself:
//   u'(z_i^+) = (u_{i+1} - u_i)/h - (h/2) kappa^2 u_i + O(h^2)
//   u'(z_i^-) = (u_i - u_{i-1})/h + (h/2) kappa^2 u_i + O(h^2)
struct flux_right_t {
    std::complex<double> ci, cip1;
};
struct flux_left_t {
    std::complex<double> cim1, ci;
};

flux_right_t flux_right(const meshed_layer& L) {
    if (L.exact) {
        const std::complex<double> s = std::sinh(L.kappa * L.h);
        const std::complex<double> ch = std::cosh(L.kappa * L.h);
        return {-L.p * L.kappa * ch / s, L.p * L.kappa / s};
    }
    return {L.p * (-1.0 / L.h - 0.5 * L.h * L.g2), L.p / L.h};
}

flux_left_t flux_left(const meshed_layer& L) {
    if (L.exact) {
        const std::complex<double> s = std::sinh(L.kappa * L.h);
        const std::complex<double> ch = std::cosh(L.kappa * L.h);
        return {-L.p * L.kappa / s, L.p * L.kappa * ch / s};
    }
    return {-L.p / L.h, L.p * (1.0 / L.h + 0.5 * L.h * L.g2)};
}

// Tridiagonal Gaussian elimination with partial pivoting (the usual gtsv
// scheme: pivoting introduces one extra superdiagonal).  Overwrites its
// inputs; throws SINGULAR_SYSTEM on a vanishing pivot.
std::vector<std::complex<double>> solve_tridiag(std::vector<std::complex<double>> dl,
                                                std::vector<std::complex<double>> d,
                                                std::vector<std::complex<double>> du,
                                                std::vector<std::complex<double>> b) {
    const std::size_t n = d.size();
    std::vector<std::complex<double>> du2(n >= 2 ? n - 2 : 0, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (std::abs(d[i]) < 1e-300) {
                throw error(errc::singular_system, "vanishing pivot in layer solve");
            }
            const std::complex<double> f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            if (i + 2 < n) du2[i] = 0.0;
        } else {
            const std::complex<double> f = d[i] / dl[i];
            d[i] = dl[i];
            const std::complex<double> tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            const std::complex<double> tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - f * b[i + 1];
        }
    }
    if (std::abs(d[n - 1]) < 1e-300) {
        throw error(errc::singular_system, "vanishing pivot in layer solve");
    }
    std::vector<std::complex<double>> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n >= 2) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t ii = n; ii-- > 2;) {
        const std::size_t i = ii - 2;
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    return x;
}

struct assembled_system {
    std::vector<std::complex<double>> dl, d, du, rhs;
    std::size_t sheet_index = 0;   // solution index of the source-sheet node
};

struct stack_context {
    std::vector<meshed_layer> meshed;
    int source_layer = -1;   // index into `meshed`
    double source_thickness = 0.0;
    double a = 0.0;
    std::complex<double> j_sheet;  // sheet strength
};

stack_context build_context(const layer_stack& stack, int n, int k,
                            const torque_model& model, const operating_point& op,
                            int mesh) {
    stack_context ctx;
    const double a = spatial_eigenvalue(n, k, model);
    const double a2 = a * a;
    const double tau = pole_pitch(model.geometry, model.magnets);
    const double kap = static_cast<double>(k) * pi_d / tau;
    const double rm = mean_radius(model.geometry);
    ctx.a = a;

    const std::size_t count = stack.layers.size();
    for (std::size_t li = 0; li < count; ++li) {
        const layer& l = stack.layers[li];
        if (is_ideal_iron(l)) {
            // Ideal back iron collapses to a Dirichlet closure; it must sit at
            // an end of the stack for that reading to make sense.
            require(li == 0 || li + 1 == count,
                    "layer_stack: ideal back iron only supported at the stack ends");
            continue;
        }
        meshed_layer m;
        m.cells = mesh;
        m.h = l.thickness_m / static_cast<double>(mesh);
        const double beta = l.conductivity_Sm * model.materials.mu0_Hm *
                            l.relative_permeability * op.series_speed() * rm * kap;
        m.g2 = std::complex<double>(a2, beta);
        m.exact = (beta == 0.0);
        m.kappa = m.exact ? std::complex<double>(std::sqrt(a2), 0.0) : std::sqrt(m.g2);
        m.p = l.relative_permeability * a2 / m.g2;
        if (l.is_source) {
            ctx.source_layer = static_cast<int>(ctx.meshed.size());
            ctx.source_thickness = l.thickness_m;
        }
        ctx.meshed.push_back(m);
    }
    require(ctx.meshed.size() >= 2, "layer_stack: need at least two meshed layers");
    require(ctx.source_layer >= 0, "layer_stack: source layer was not meshed");
    require(ctx.source_layer + 1 < static_cast<int>(ctx.meshed.size()),
            "layer_stack: source layer needs a layer above it");

    const double m_nk = magnetization_coefficient(n, k, model);
    // The ratio u(sheet)/J is independent of J; fall back to unit strength
    // when the magnetization coefficient vanishes (harmonic sine zeros).
    ctx.j_sheet = (m_nk != 0.0) ? std::complex<double>(-m_nk, 0.0)
                                : std::complex<double>(1.0, 0.0);
    return ctx;
}

assembled_system assemble(const stack_context& ctx) {
    // Global nodes: 0 .. total_cells, with Dirichlet ends dropped.
    int total_cells = 0;
    for (const meshed_layer& m : ctx.meshed) total_cells += m.cells;
    const std::size_t n_unknown = static_cast<std::size_t>(total_cells - 1);

    assembled_system sys;
    sys.dl.assign(n_unknown - 1, 0.0);
    sys.d.assign(n_unknown, 0.0);
    sys.du.assign(n_unknown - 1, 0.0);
    sys.rhs.assign(n_unknown, 0.0);

    // Interface global node indices and per-node layer lookup.
    std::vector<int> layer_start;  // global node index of each layer's bottom face
    int acc = 0;
    for (const meshed_layer& m : ctx.meshed) {
        layer_start.push_back(acc);
        acc += m.cells;
    }

    const int sheet_node = layer_start[ctx.source_layer] + ctx.meshed[ctx.source_layer].cells;
    sys.sheet_index = static_cast<std::size_t>(sheet_node - 1);

    for (std::size_t row = 0; row < n_unknown; ++row) {
        const int node = static_cast<int>(row) + 1;  // global node index
        // Which layer does this node sit in / border?
        int li = 0;
        while (li + 1 < static_cast<int>(ctx.meshed.size()) &&
               node >= layer_start[li] + ctx.meshed[li].cells) {
            if (node == layer_start[li] + ctx.meshed[li].cells) break;
            ++li;
        }
        const bool at_interface =
            (li + 1 < static_cast<int>(ctx.meshed.size())) &&
            (node == layer_start[li] + ctx.meshed[li].cells);

        std::complex<double> sub, diag, sup, rhs;
        if (at_interface) {
            const meshed_layer& L = ctx.meshed[li];
            const meshed_layer& R = ctx.meshed[li + 1];
            const flux_right_t fr = flux_right(R);
            const flux_left_t fl = flux_left(L);
            sub = -fl.cim1;
            diag = fr.ci - fl.ci;
            sup = fr.cip1;
            rhs = (node == sheet_node) ? ctx.j_sheet : std::complex<double>(0.0, 0.0);
        } else {
            const meshed_layer& L = ctx.meshed[li];
            sub = 1.0;
            sup = 1.0;
            diag = L.exact ? -2.0 * std::cosh(L.kappa * L.h)
                           : -(2.0 + L.g2 * (L.h * L.h));
            rhs = 0.0;
        }

        const double scale =
            std::max({std::abs(sub), std::abs(diag), std::abs(sup)});
        sub /= scale;
        diag /= scale;
        sup /= scale;
        rhs /= scale;

        if (row > 0) sys.dl[row - 1] = sub;
        sys.d[row] = diag;
        if (row + 1 < n_unknown) sys.du[row] = sup;
        sys.rhs[row] = rhs;
    }
    return sys;
}

struct single_solve {
    std::complex<double> r;
    double residual_norm;
};

single_solve solve_once(const layer_stack& stack, int n, int k, const torque_model& model,
                        const operating_point& op, int mesh) {
    const stack_context ctx = build_context(stack, n, k, model, op, mesh);
    const assembled_system sys = assemble(ctx);

    const std::vector<std::complex<double>> x =
        solve_tridiag(sys.dl, sys.d, sys.du, sys.rhs);

    // Backward error of the scaled system.
    double max_res = 0.0, max_x = 0.0, max_rhs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::complex<double> r = sys.d[i] * x[i] - sys.rhs[i];
        if (i > 0) r += sys.dl[i - 1] * x[i - 1];
        if (i + 1 < x.size()) r += sys.du[i] * x[i + 1];
        max_res = std::max(max_res, std::abs(r));
        max_x = std::max(max_x, std::abs(x[i]));
        max_rhs = std::max(max_rhs, std::abs(sys.rhs[i]));
    }
    // Rows are scaled to unit max coefficient, so 3*max|x| bounds |A||x|.
    const double denom = 3.0 * max_x + max_rhs;
    single_solve out;
    out.residual_norm = denom > 0.0 ? max_res / denom : 0.0;
    out.r = ctx.a * x[sys.sheet_index] /
            (ctx.j_sheet * std::sinh(ctx.a * ctx.source_thickness));
    return out;
}

}  // namespace

void layer_stack::validate() const {
    require(layers.size() >= 3, "layer_stack: need at least three layers");
    require(mesh_points_per_layer >= 8, "layer_stack: mesh_points_per_layer must be >= 8");
    require(mesh_points_per_layer % 2 == 0, "layer_stack: mesh_points_per_layer must be even");
    int sources = 0;
    for (const layer& l : layers) {
        require(l.thickness_m > 0.0, "layer_stack: layer thickness must be > 0");
        require(l.relative_permeability > 0.0,
                "layer_stack: relative permeability must be > 0");
        require(l.conductivity_Sm >= 0.0, "layer_stack: conductivity must be >= 0");
        if (l.is_source) ++sources;
    }
    require(sources == 1, "layer_stack: exactly one source layer expected");
}

layer_stack default_layer_stack(const torque_model& model, int mesh_points_per_layer) {
    const double inf = std::numeric_limits<double>::infinity();
    const brake_geometry& g = model.geometry;
    layer_stack stack;
    stack.mesh_points_per_layer = mesh_points_per_layer;
    stack.layers = {
        {g.back_iron_thickness, inf, 0.0, false},
        {g.magnet_thickness, 1.0, 0.0, true},
        {g.air_gap, 1.0, 0.0, false},
        {g.plate_thickness, 1.0, model.materials.sigma_Sm, false},
        {g.back_iron_thickness, inf, 0.0, false},
    };
    return stack;
}

oracle_result solve_stack_bvp(const layer_stack& stack, int n, int k,
                              const torque_model& model, const operating_point& op) {
    model.validate();
    stack.validate();
    const int mesh = stack.mesh_points_per_layer;

    const single_solve coarse = solve_once(stack, n, k, model, op, mesh / 2);
    const single_solve fine = solve_once(stack, n, k, model, op, mesh);

    oracle_result res;
    res.grid_size = mesh;
    res.residual_norm = fine.residual_norm;
    res.r_numeric = (4.0 * fine.r - coarse.r) / 3.0;
    res.error_estimate = std::abs(fine.r - coarse.r) / 3.0;
    const double scale = std::max(std::abs(res.r_numeric), 1e-30);
    if (res.error_estimate > 1e-2 * scale) {
        std::ostringstream msg;
        msg << "mesh-refinement error estimate " << res.error_estimate << " exceeds 1% of |r|="
            << std::abs(res.r_numeric) << " at mesh " << mesh << "; refine the mesh";
        throw error(errc::no_convergence, msg.str());
    }
    return res;
}

oracle_result solve_harmonic_bvp(int n, int k, const torque_model& model,
                                 const operating_point& op, int mesh) {
    layer_stack stack = default_layer_stack(model, mesh);
    return solve_stack_bvp(stack, n, k, model, op);
}

refinement_result refinement_study(int n, int k, const torque_model& model,
                                   const operating_point& op,
                                   const std::vector<int>& meshes) {
    require(meshes.size() >= 3, "refinement_study: need at least three meshes");
    for (std::size_t i = 0; i + 1 < meshes.size(); ++i) {
        require(meshes[i] < meshes[i + 1], "refinement_study: meshes must be strictly increasing");
    }
    require(meshes.front() >= 8, "refinement_study: meshes must be >= 8");
    model.validate();

    const layer_stack stack = default_layer_stack(model, meshes.back());
    std::vector<std::complex<double>> values;
    values.reserve(meshes.size());
    for (int m : meshes) {
        values.push_back(solve_once(stack, n, k, model, op, m).r);
    }

    // Reference: second-order Richardson extrapolation of the two finest
    // single-grid values.
    const double mf = static_cast<double>(meshes.back());
    const double mp = static_cast<double>(meshes[meshes.size() - 2]);
    const std::complex<double> r_ref =
        (mf * mf * values.back() - mp * mp * values[values.size() - 2]) / (mf * mf - mp * mp);
    const double ref_mag = std::max(std::abs(r_ref), 1e-300);

    refinement_result out;
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        out.errors.emplace_back(meshes[i], std::abs(values[i] - r_ref) / ref_mag);
    }
    double order_sum = 0.0;
    int order_count = 0;
    for (std::size_t i = 0; i + 1 < out.errors.size(); ++i) {
        const double e0 = out.errors[i].second;
        const double e1 = out.errors[i + 1].second;
        if (e0 > 0.0 && e1 > 0.0) {
            order_sum += std::log(e0 / e1) /
                         std::log(static_cast<double>(meshes[i + 1]) / meshes[i]);
            ++order_count;
        }
    }
    out.observed_order = order_count > 0 ? order_sum / order_count : 0.0;
    return out;
}

oracle_report run_oracle_check(const torque_model& model, speed_convention convention,
                               int mesh) {
    model.validate();
    oracle_report rep;
    rep.gate = 1e-6;
    const int harmonics[] = {1, 3, 5};
    const double speeds[] = {0.0, 1000.0, 4000.0, 8000.0};

    bool all_ok = true;
    for (int n : harmonics) {
        for (int k : harmonics) {
            for (double rpm : speeds) {
                operating_point op{rpm, convention};
                oracle_record rec;
                rec.n = n;
                rec.k = k;
                rec.speed_rpm = rpm;
                rec.mesh = mesh;
                try {
                    rec.r_closed = reflection_coefficient(n, k, model, op);
                    const oracle_result res = solve_harmonic_bvp(n, k, model, op, mesh);
                    rec.r_numeric = res.r_numeric;
                    rec.residual_norm = res.residual_norm;
                    rec.rel_error =
                        std::abs(rec.r_numeric - rec.r_closed) / std::abs(rec.r_closed);
                    rep.max_rel_error = std::max(rep.max_rel_error, rec.rel_error);
                } catch (const error& e) {
                    rec.status = e.name();
                    all_ok = false;
                }
                rep.records.push_back(rec);
            }
        }
    }
    rep.pass = all_ok && rep.max_rel_error < rep.gate;

    int start = std::max(8, mesh / 4);
    if (start % 2 != 0) ++start;
    rep.refinement = refinement_study(1, 1, model,
                                      operating_point{speeds[3], convention},
                                      {start, 2 * start, 4 * start});
    return rep;
}

std::string format_oracle_report(const oracle_report& report) {
    std::ostringstream os;
    os.setf(std::ios::scientific);
    os.precision(9);
    os << "# layer-solver self-check: closed form vs finite differences\n";
    os << "# columns: n k speed_rpm re(r_closed) im(r_closed) re(r_numeric) im(r_numeric)"
          " rel_error mesh residual status\n";
    for (const oracle_record& r : report.records) {
        os << r.n << " " << r.k << " " << r.speed_rpm << " " << r.r_closed.real() << " "
           << r.r_closed.imag() << " " << r.r_numeric.real() << " " << r.r_numeric.imag()
           << " " << r.rel_error << " " << r.mesh << " " << r.residual_norm << " "
           << r.status << "\n";
    }
    os << "max_rel_error " << report.max_rel_error << "\n";
    os << "gate " << report.gate << "\n";
    os << "refinement (n=1, k=1):\n";
    for (const auto& [mesh, err] : report.refinement.errors) {
        os << "  mesh " << mesh << " error_vs_reference " << err << "\n";
    }
    os.precision(3);
    os << "observed_order " << report.refinement.observed_order << "\n";
    os << "verdict " << (report.pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

}  // namespace ecb
