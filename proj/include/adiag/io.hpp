#pragma once

// Field and report file formats (JSON, format_version 1). A field file
// carries either explicit per-node samples or a generator block that is
// re-evaluated deterministically on load. Report files serialize a
// DiagonalizationReport; everything except the timing block is a pure
// function of the inputs, so byte-identical reruns are a testable contract.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adiag/diag.hpp"

namespace adiag {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

using json = nlohmann::ordered_json;

// FNV-1a 64 over the raw bytes; provenance stamp for reports
inline std::string digest_bytes(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// write-temp-then-rename so readers never observe a partial file
inline void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << bytes;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot rename " + tmp + " to " + path);
}

struct FieldFile {
    MatrixField field;
    std::string digest;  // of the file bytes as read
};

namespace detail {

inline void require_finite(double v, const char* where) {
    if (!std::isfinite(v)) throw ParseError(std::string("non-finite number in ") + where);
}

inline ModelParams params_from_json(const json& j) {
    ModelParams p;
    if (j.contains("n")) p.n = j.at("n").get<int>();
    if (j.contains("k")) p.k = j.at("k").get<int>();
    if (j.contains("scale")) p.scale = j.at("scale").get<double>();
    return p;
}

}  // namespace detail

inline MatrixField field_from_json(const json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion)
        throw ParseError("field file: missing or unsupported format_version");
    const json& jm = j.at("mesh");
    const MeshKind kind = mesh_kind_from_string(jm.at("kind").get<std::string>());
    const int resolution = jm.at("N").get<int>();
    MeshPtr mesh = build_mesh_shared(kind, resolution);
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParseError("field file: n must be positive");
    const FieldTag tag = field_tag_from_string(j.at("tag").get<std::string>());

    const bool has_samples = j.contains("samples");
    const bool has_generator = j.contains("generator");
    if (has_samples == has_generator)
        throw ParseError("field file: exactly one of samples/generator required");

    MatrixField f(mesh, n, tag);
    if (has_generator) {
        const json& g = j.at("generator");
        const ModelParams base = detail::params_from_json(g.value("params", json::object()));
        ModelParams p = base;
        p.n = (g.contains("params") && g.at("params").contains("n")) ? base.n : n;
        const std::uint64_t seed = g.value("seed", 42ULL);
        f = make_model(g.at("name").get<std::string>(), mesh, p, seed);
        if (f.n != n) throw ParseError("field file: generator dimension disagrees with n");
        f.tag = tag;
    } else {
        const json& js = j.at("samples");
        if (static_cast<int>(js.size()) != mesh->node_count())
            throw ParseError("field file: samples length does not match the node count");
        for (int x = 0; x < mesh->node_count(); ++x) {
            const json& row = js.at(x);
            if (static_cast<int>(row.size()) != n * n)
                throw ParseError("field file: sample " + std::to_string(x) +
                                 " is not n*n entries");
            for (int k = 0; k < n * n; ++k) {
                const double re = row.at(k).at(0).get<double>();
                const double im = row.at(k).at(1).get<double>();
                detail::require_finite(re, "samples");
                detail::require_finite(im, "samples");
                f.samples[x].data()[k] = cxd(re, im);
            }
        }
    }
    if (tag != FieldTag::general && tag_defect(f) > kTagTol)
        throw ParseError("field file: samples violate the '" + std::string(to_string(tag)) +
                         "' tag beyond 1e-10");
    return f;
}

inline FieldFile load_field(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    json j;
    try {
        j = json::parse(bytes);
    } catch (const std::exception& e) {
        throw ParseError("field file: " + std::string(e.what()));
    }
    try {
        return FieldFile{field_from_json(j), digest_bytes(bytes)};
    } catch (const json::exception& e) {
        throw ParseError("field file: " + std::string(e.what()));
    }
}

inline json field_to_json(const MatrixField& f) {
    json j;
    j["format_version"] = kFormatVersion;
    j["mesh"] = {{"kind", to_string(f.mesh->kind)}, {"N", f.mesh->resolution}};
    j["n"] = f.n;
    j["tag"] = to_string(f.tag);
    json samples = json::array();
    for (const CMatrix& s : f.samples) {
        json row = json::array();
        for (const cxd& z : s.data()) row.push_back({z.real(), z.imag()});
        samples.push_back(std::move(row));
    }
    j["samples"] = std::move(samples);
    return j;
}

inline json report_to_json(const DiagonalizationReport& r, const std::string& input_digest,
                           bool emit_unitary) {
    json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["input_digest"] = input_digest;
    j["status"] = to_string(r.status);
    j["tag"] = to_string(r.input_tag);
    j["mesh"] = {{"kind", to_string(r.mesh_kind)}, {"N", r.resolution}};
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["epsilon_requested"] = r.epsilon_requested;
    j["epsilon_achieved"] = r.epsilon_achieved;
    if (r.input_tag == FieldTag::unitary) j["log_rotation"] = r.log_rotation;
    if (!r.message.empty()) j["message"] = r.message;

    json jo;
    jo["chern_numbers"] = r.obstruction.chern_numbers;
    jo["winding_numbers"] = r.obstruction.winding_numbers;
    json jres = json::array();
    for (bool b : r.obstruction.resolved) jres.push_back(b);
    jo["resolved"] = std::move(jres);
    jo["chern_available"] = r.obstruction.chern_available;
    jo["min_overlap"] =
        std::isfinite(r.obstruction.min_overlap) ? r.obstruction.min_overlap : -1.0;
    jo["min_gap"] = std::isfinite(r.obstruction.min_gap) ? r.obstruction.min_gap : -1.0;
    j["obstruction"] = std::move(jo);

    j["residual_breakdown"] = {{"offband_residual", r.breakdown.offband_residual},
                               {"perturbation_move", r.breakdown.perturbation_move},
                               {"conjugator_defect", r.breakdown.conjugator_defect},
                               {"u_edge_defect", r.breakdown.u_edge_defect},
                               {"unitarity_defect", r.breakdown.unitarity_defect}};

    json lam = json::array();
    for (const ScalarField& band : r.lambda) {
        json arr = json::array();
        for (const cxd& v : band.values) arr.push_back(v.real());
        lam.push_back(std::move(arr));
    }
    j["lambda"] = std::move(lam);

    if (!r.angle_histogram.empty()) j["angle_histogram"] = r.angle_histogram;

    if (emit_unitary && r.u.has_value()) {
        json ju = json::array();
        for (const CMatrix& s : r.u->samples) {
            json row = json::array();
            for (const cxd& z : s.data()) row.push_back({z.real(), z.imag()});
            ju.push_back(std::move(row));
        }
        j["unitary"] = std::move(ju);
    }
    j["timing"] = {{"elapsed_seconds", r.elapsed_seconds}};
    return j;
}

// Reads back what cmd_verify needs: status, lambda, the unitary, epsilons.
inline DiagonalizationReport report_from_json(const json& j, MeshPtr mesh) {
    DiagonalizationReport r;
    const std::string status = j.at("status").get<std::string>();
    r.status = status == "success"      ? DiagStatus::success
               : status == "obstructed" ? DiagStatus::obstructed
                                        : DiagStatus::unresolved;
    r.input_tag = field_tag_from_string(j.at("tag").get<std::string>());
    r.mesh_kind = mesh->kind;
    r.resolution = mesh->resolution;
    r.n = j.at("n").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.epsilon_requested = j.at("epsilon_requested").get<double>();
    r.epsilon_achieved = j.at("epsilon_achieved").get<double>();
    if (j.contains("log_rotation")) r.log_rotation = j.at("log_rotation").get<double>();
    for (const json& arr : j.at("lambda")) {
        ScalarField band(mesh, true);
        if (static_cast<int>(arr.size()) != mesh->node_count())
            throw ParseError("report: lambda band length mismatch");
        for (int x = 0; x < mesh->node_count(); ++x)
            band.values[x] = cxd(arr.at(x).get<double>(), 0.0);
        r.lambda.push_back(std::move(band));
    }
    if (j.contains("unitary")) {
        MatrixField u(mesh, r.n, FieldTag::unitary);
        const json& ju = j.at("unitary");
        if (static_cast<int>(ju.size()) != mesh->node_count())
            throw ParseError("report: unitary length mismatch");
        for (int x = 0; x < mesh->node_count(); ++x) {
            const json& row = ju.at(x);
            for (int k = 0; k < r.n * r.n; ++k)
                u.samples[x].data()[k] =
                    cxd(row.at(k).at(0).get<double>(), row.at(k).at(1).get<double>());
        }
        r.u = std::move(u);
    }
    return r;
}

inline DiagonalizationReport load_report(const std::string& path, MeshPtr mesh) {
    json j;
    try {
        j = json::parse(read_file_bytes(path));
        return report_from_json(j, std::move(mesh));
    } catch (const json::exception& e) {
        throw ParseError("report file: " + std::string(e.what()));
    }
}

inline json report_mesh_header(const std::string& path) {
    try {
        const json j = json::parse(read_file_bytes(path));
        return j.at("mesh");
    } catch (const json::exception& e) {
        throw ParseError("report file: " + std::string(e.what()));
    }
}

}  // namespace adiag
