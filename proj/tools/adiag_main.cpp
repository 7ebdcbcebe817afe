// adiag: approximate diagonalization of matrix fields over discretized
// compact parameter spaces, with topological obstruction detection.
//
// Subcommands: diagonalize, obstruction, verify, demo. Exit codes: 0 success,
// 2 obstructed, 3 unresolved, 1 usage/parse errors, 4 verification failed.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "adiag/io.hpp"
#include "adiag/svg.hpp"

namespace fs = std::filesystem;
using namespace adiag;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitObstructed = 2;
constexpr int kExitUnresolved = 3;
constexpr int kExitVerifyFailed = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ADIAG_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            std::cerr << "adiag: ignoring malformed ADIAG_SEED\n";
        }
    }
    return 42;
}

int exit_for(DiagStatus s) {
    switch (s) {
        case DiagStatus::success: return kExitOk;
        case DiagStatus::obstructed: return kExitObstructed;
        case DiagStatus::unresolved: return kExitUnresolved;
    }
    return kExitUsage;
}

DiagonalizationReport run_for_tag(const MatrixField& f, double eps, std::uint64_t seed) {
    switch (f.tag) {
        case FieldTag::hermitian: return approx_diagonalize_hermitian(f, eps, seed);
        case FieldTag::unitary: return approx_diagonalize_unitary(f, eps, seed);
        case FieldTag::projection: return diagonalize_projection(f, seed);
        case FieldTag::general: break;
    }
    throw ParseError("cannot diagonalize a field tagged 'general'");
}

void write_json(const std::string& path, const json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

std::string svg_path_for(const std::string& out) {
    const fs::path p(out);
    fs::path q = p;
    q.replace_extension(".svg");
    return q.string();
}

// 1-d meshes plot the eigenvalue fields; 2-d meshes plot the band-0
// plaquette curvature of the input's own eigenframes.
bool emit_svg(const std::string& path, const MatrixField& f, const DiagonalizationReport& r) {
    const Mesh& mesh = *f.mesh;
    if (mesh_dim(mesh.kind) == 1) {
        std::vector<ScalarField> bands = r.lambda;
        std::string quantity = "eigenvalue fields";
        if (bands.empty() && (f.tag == FieldTag::hermitian || f.tag == FieldTag::projection)) {
            MatrixField h = f;
            h.tag = FieldTag::hermitian;
            bands = pointwise_spectra(h);
        }
        if (bands.empty() && f.tag == FieldTag::unitary) {
            bands.assign(f.n, ScalarField(f.mesh, true));
            for (int x = 0; x < mesh.node_count(); ++x) {
                const UnitaryEig ue = unitary_eig(f.samples[x]);
                for (int j = 0; j < f.n; ++j) bands[j].values[x] = cxd(ue.angles[j], 0.0);
            }
            quantity = "eigenvalue angle fields";
        }
        if (bands.empty()) return false;
        const std::string title = quantity + " (" + to_string(mesh.kind) +
                                  " N=" + std::to_string(mesh.resolution) + ")";
        atomic_write(path, svg_eigenvalue_fields(mesh, bands, title));
        return true;
    }
    if (f.tag != FieldTag::hermitian && f.tag != FieldTag::projection) return false;
    MatrixField h = f;
    h.tag = FieldTag::hermitian;
    try {
        const auto bands = eigenframes(h);
        const std::string title = std::string("band-0 curvature (") + to_string(mesh.kind) +
                                  " N=" + std::to_string(mesh.resolution) + ")";
        atomic_write(path, svg_curvature_map(mesh, bands.front().curvature, title));
        return true;
    } catch (const Error&) {
        return false;  // gapless or unresolved input: nothing meaningful to draw
    }
}

int cmd_diagonalize(const std::string& input, double eps, std::uint64_t seed,
                    const std::string& out, bool emit_unitary, bool svg) {
    const FieldFile ff = load_field(input);
    const DiagonalizationReport r = run_for_tag(ff.field, eps, seed);
    if (!out.empty()) write_json(out, report_to_json(r, ff.digest, emit_unitary));
    if (svg && !out.empty()) {
        if (!emit_svg(svg_path_for(out), ff.field, r))
            std::cerr << "adiag: no plottable content for this input; svg skipped\n";
    }
    std::cout << "status " << to_string(r.status) << ", epsilon_achieved " << r.epsilon_achieved
              << "\n";
    if (r.status != DiagStatus::success && !r.message.empty())
        std::cerr << "adiag: " << r.message << "\n";
    return exit_for(r.status);
}

struct ModelSpec {
    std::string name;
    std::string mesh_kind;  // empty = model default
    int mesh_n = 0;
    ModelParams params;
    std::uint64_t seed = 42;
};

MatrixField build_model_field(const ModelSpec& spec) {
    std::string kind = spec.mesh_kind;
    int n = spec.mesh_n;
    if (kind.empty()) {
        if (spec.name == "berry-sphere" || spec.name == "berry-sphere-deg2" ||
            spec.name == "projection-sphere")
            kind = "sphere";
        else if (spec.name == "winding-unitary" || spec.name == "unitary-diag" ||
                 spec.name == "circle-rotation")
            kind = "circle";
        else
            kind = "interval";
    }
    if (n == 0) n = (kind == "sphere") ? 16 : (kind == "circle") ? 128 : 101;
    MeshPtr mesh = build_mesh_shared(mesh_kind_from_string(kind), n);
    return make_model(spec.name, std::move(mesh), spec.params, spec.seed);
}

// Detectors only: pointwise gap scan, eigenframes, Chern numbers on closed
// 2-d meshes, determinant windings for unitary fields.
int cmd_obstruction(const std::string& input, const ModelSpec& model, const std::string& out) {
    MatrixField f;
    std::string digest;
    if (input.empty()) {
        f = build_model_field(model);
        digest = digest_bytes("model:" + model.name);
    } else {
        FieldFile ff = load_field(input);
        f = std::move(ff.field);
        digest = ff.digest;
    }

    DiagonalizationReport r;
    r.input_tag = f.tag;
    r.mesh_kind = f.mesh->kind;
    r.resolution = f.mesh->resolution;
    r.n = f.n;
    r.seed = model.seed;
    const detail::StageTimer timer;

    bool unresolved = false;
    if (f.tag == FieldTag::hermitian || f.tag == FieldTag::projection) {
        MatrixField h = f;
        h.tag = FieldTag::hermitian;
        const auto spectra = pointwise_spectra(h);
        r.obstruction.min_gap = detail::field_min_gap(spectra);
        if (r.obstruction.min_gap > kGapTol) {
            const auto bands = eigenframes(h);
            r.obstruction.resolved.resize(f.n);
            r.obstruction.min_overlap = std::numeric_limits<double>::infinity();
            for (int j = 0; j < f.n; ++j) {
                r.obstruction.resolved[j] = bands[j].resolved;
                r.obstruction.min_overlap =
                    std::min(r.obstruction.min_overlap, bands[j].min_overlap);
            }
            if (f.mesh->closed_2d) {
                for (int j = 0; j < f.n && !unresolved; ++j) {
                    if (!bands[j].resolved)
                        unresolved = true;
                    else
                        r.obstruction.chern_numbers.push_back(chern_number(bands[j]));
                }
                r.obstruction.chern_available = !unresolved;
                if (unresolved) {
                    r.obstruction.chern_numbers.clear();
                    r.message = "frame overlap below overlap_tol; refine the mesh";
                }
            }
        } else {
            unresolved = true;
            r.message = "pointwise spectral gap below gap_tol; bands not separable";
        }
    } else if (f.tag == FieldTag::unitary) {
        const ScalarField det = field_det_tr(f).first;
        for (const Cycle& c : cycle_basis(*f.mesh))
            r.obstruction.winding_numbers.push_back(winding_number(det, c));
    }

    r.status = unresolved                      ? DiagStatus::unresolved
               : r.obstruction.any_nonzero()   ? DiagStatus::obstructed
                                               : DiagStatus::success;
    r.elapsed_seconds = timer.seconds();
    if (!out.empty()) write_json(out, report_to_json(r, digest, false));
    std::cout << "obstruction status " << to_string(r.status);
    if (!r.obstruction.chern_numbers.empty()) {
        std::cout << ", chern";
        for (int c : r.obstruction.chern_numbers) std::cout << " " << c;
    }
    if (!r.obstruction.winding_numbers.empty()) {
        std::cout << ", winding";
        for (int w : r.obstruction.winding_numbers) std::cout << " " << w;
    }
    std::cout << "\n";
    return unresolved ? kExitUnresolved : kExitOk;
}

int cmd_verify(const std::string& field_path, const std::string& report_path) {
    const FieldFile ff = load_field(field_path);
    const json header = report_mesh_header(report_path);
    if (header.at("kind").get<std::string>() != to_string(ff.field.mesh->kind) ||
        header.at("N").get<int>() != ff.field.mesh->resolution)
        throw ParseError("verify: report mesh does not match the field file");
    const DiagonalizationReport r = load_report(report_path, ff.field.mesh);
    if (!r.u.has_value()) throw ParseError("verify: report carries no unitary (--emit-unitary)");
    const VerifyResult v = verify_report(ff.field, r);
    std::cout << "recomputed_epsilon " << v.recomputed_epsilon << "\n"
              << "unitarity_defect " << v.unitarity_defect << "\n"
              << "max_weyl_gap " << v.max_weyl_gap << "\n"
              << "sorted " << (v.sorted_ok ? "yes" : "no") << "\n";
    if (!v.ok) {
        std::cerr << "adiag: verification failed: " << v.first_violation << "\n";
        return kExitVerifyFailed;
    }
    std::cout << "verified\n";
    return kExitOk;
}

struct DemoCase {
    std::string model;
    std::string mesh_kind;
    int mesh_n;
    int k;
    double eps;
};

int cmd_demo(const std::string& name, const std::string& outdir, std::uint64_t seed) {
    static const std::map<std::string, DemoCase> demos = {
        {"two-by-two", {"two-by-two", "interval", 101, 1, 0.05}},
        {"circle-rotation", {"circle-rotation", "circle", 128, 1, 0.05}},
        {"berry-sphere", {"berry-sphere", "sphere", 16, 1, 0.1}},
        {"winding-unitary", {"winding-unitary", "circle", 128, 1, 0.1}},
        {"projection-sphere", {"projection-sphere", "sphere", 16, 1, 0.25}},
    };
    const auto it = demos.find(name);
    if (it == demos.end()) {
        std::cerr << "adiag: unknown demo '" << name << "'; known:";
        for (const auto& [k, v] : demos) std::cerr << " " << k;
        std::cerr << "\n";
        return kExitUsage;
    }
    const DemoCase& d = it->second;
    const fs::path dir = fs::path(outdir) / name;
    fs::create_directories(dir);

    MeshPtr mesh = build_mesh_shared(mesh_kind_from_string(d.mesh_kind), d.mesh_n);
    ModelParams params;
    params.k = d.k;
    const MatrixField field = make_model(d.model, mesh, params, seed);

    const std::string field_path = (dir / "field.json").string();
    write_json(field_path, field_to_json(field));
    const std::string digest = digest_bytes(read_file_bytes(field_path));

    const DiagonalizationReport r = run_for_tag(field, d.eps, seed);
    write_json((dir / "report.json").string(), report_to_json(r, digest, true));
    if (!emit_svg((dir / "plot.svg").string(), field, r))
        std::cerr << "adiag: demo '" << name << "': svg skipped\n";

    std::cout << name << ": status " << to_string(r.status) << ", epsilon_requested " << d.eps
              << ", epsilon_achieved " << r.epsilon_achieved;
    if (!r.obstruction.chern_numbers.empty()) {
        std::cout << ", chern";
        for (int c : r.obstruction.chern_numbers) std::cout << " " << c;
    }
    if (!r.obstruction.winding_numbers.empty()) {
        std::cout << ", winding";
        for (int w : r.obstruction.winding_numbers) std::cout << " " << w;
    }
    std::cout << ", wrote " << dir.string() << "\n";
    return exit_for(r.status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximate diagonalization of matrix fields over meshes"};
    app.require_subcommand(1);

    std::string input, out, report_path, demo_name, outdir = "demo-out";
    double eps = 0.01;
    std::uint64_t seed = default_seed();
    bool emit_unitary = false, svg = false;
    ModelSpec model;

    CLI::App* diag = app.add_subcommand("diagonalize", "diagonalize a matrix field file");
    diag->add_option("input", input, "field file (JSON)")->required();
    diag->add_option("--eps", eps, "target sup-norm residual");
    diag->add_option("--seed", seed, "perturbation seed");
    diag->add_option("--out", out, "report output path");
    diag->add_flag("--emit-unitary", emit_unitary, "include U in the report");
    diag->add_flag("--svg", svg, "write an SVG plot next to the report");

    std::string model_list;
    for (const std::string& m : model_names()) model_list += (model_list.empty() ? "" : " ") + m;

    CLI::App* obst = app.add_subcommand("obstruction", "run obstruction detectors only");
    obst->add_option("input", input, "field file (JSON)");
    obst->add_option("--model", model.name, "built-in model instead of a file: " + model_list);
    obst->add_option("--mesh", model.mesh_kind, "mesh kind for --model");
    obst->add_option("--N", model.mesh_n, "mesh resolution for --model");
    obst->add_option("--n", model.params.n, "matrix dimension for --model");
    obst->add_option("--k", model.params.k, "winding multiplier for --model");
    obst->add_option("--scale", model.params.scale, "amplitude for --model");
    obst->add_option("--seed", model.seed, "generator seed");
    obst->add_option("--out", out, "report output path");

    CLI::App* verify = app.add_subcommand("verify", "re-measure a success report");
    verify->add_option("field", input, "field file (JSON)")->required();
    verify->add_option("report", report_path, "report file (JSON)")->required();

    CLI::App* demo = app.add_subcommand("demo", "run a named scenario");
    demo->add_option("name", demo_name, "two-by-two | circle-rotation | berry-sphere | "
                                        "winding-unitary | projection-sphere")
        ->required();
    demo->add_option("--outdir", outdir, "demo output directory");
    demo->add_option("--seed", seed, "scenario seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (diag->parsed()) return cmd_diagonalize(input, eps, seed, out, emit_unitary, svg);
        if (obst->parsed()) {
            if (input.empty() == model.name.empty())
                throw ParseError("obstruction: give exactly one of an input file or --model");
            return cmd_obstruction(input, model, out);
        }
        if (verify->parsed()) return cmd_verify(input, report_path);
        if (demo->parsed()) return cmd_demo(demo_name, outdir, seed);
    } catch (const ParseError& e) {
        std::cerr << "adiag: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "adiag: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
