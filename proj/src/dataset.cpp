#include "repc/dataset.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "repc/errors.hpp"

namespace repc::data {

using nlohmann::json;

void Dataset::validate() const {
    if (meta.vocab < 1) throw format_error("dataset: vocab must be >= 1");
    if (meta.dim < 1) throw format_error("dataset: dim must be >= 1");
    if (symbolic) {
        if (meta.classes < 2) throw format_error("dataset: symbolic targets need classes >= 2");
        if (y.rows != w.rows || y.cols != meta.dim) {
            throw format_error("dataset: symbolic target shape mismatch");
        }
    } else {
        if (!(meta.lambda_z > 0.0)) throw format_error("dataset: missing lambda_z");
        if (z.rows != w.rows || z.cols != meta.dim) {
            throw format_error("dataset: continuous target shape mismatch");
        }
    }
    for (const int32_t t : w.tok) {
        if (t < 0 || t >= meta.vocab) throw format_error("dataset: token out of range");
    }
}

void write_jsonl(const std::string& path, const Dataset& ds) {
    ds.validate();
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw format_error("dataset: cannot open " + path + " for writing");
    json meta{{"vocab", ds.meta.vocab},    {"dim", ds.meta.dim},
              {"lambda_z", ds.meta.lambda_z}, {"seed", ds.meta.seed},
              {"generator", ds.meta.generator}};
    if (ds.symbolic) meta["classes"] = ds.meta.classes;
    f << json{{"meta", meta}}.dump() << "\n";
    for (int64_t i = 0; i < ds.rows(); ++i) {
        json rec;
        rec["w"] = std::vector<int32_t>(ds.w.row(i), ds.w.row(i) + ds.w.cols);
        if (ds.symbolic) {
            rec["y"] = std::vector<int32_t>(ds.y.row(i), ds.y.row(i) + ds.y.cols);
        } else {
            std::vector<double> zrow(static_cast<size_t>(ds.z.cols));
            for (int64_t c = 0; c < ds.z.cols; ++c) zrow[static_cast<size_t>(c)] = ds.z.value(i, c);
            rec["z"] = zrow;
        }
        f << rec.dump() << "\n";
    }
    if (!f) throw format_error("dataset: write failed for " + path);
}

namespace {

json parse_line(const std::string& line, int64_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw format_error("invalid JSON", lineno);
    return j;
}

}  // namespace

Dataset read_jsonl(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw format_error("dataset: cannot open " + path);

    std::string line;
    int64_t lineno = 0;
    if (!std::getline(f, line)) throw format_error("empty dataset file", 1);
    ++lineno;
    const json header = parse_line(line, lineno);
    if (!header.contains("meta")) throw format_error("first line must carry \"meta\"", lineno);
    const json& meta = header["meta"];
    Dataset ds;
    try {
        ds.meta.vocab = meta.at("vocab").get<int64_t>();
        ds.meta.dim = meta.at("dim").get<int64_t>();
        ds.meta.lambda_z = meta.value("lambda_z", 0.0);
        ds.meta.seed = meta.value("seed", uint64_t{0});
        ds.meta.generator = meta.value("generator", std::string{});
        ds.meta.classes = meta.value("classes", int64_t{0});
    } catch (const json::exception& e) {
        throw format_error(std::string("bad meta: ") + e.what(), lineno);
    }
    if (ds.meta.vocab < 1 || ds.meta.dim < 1) {
        throw format_error("meta needs vocab >= 1 and dim >= 1", lineno);
    }

    std::vector<int32_t> w_flat;
    std::vector<int32_t> y_flat;
    std::vector<int64_t> z_flat;
    int64_t n_tokens = -1;
    int64_t records = 0;
    int first_kind = 0;  // 1 = symbolic, 2 = continuous

    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json rec = parse_line(line, lineno);
        if (!rec.contains("w") || !rec["w"].is_array()) {
            throw format_error("record missing token array \"w\"", lineno);
        }
        const bool has_y = rec.contains("y");
        const bool has_z = rec.contains("z");
        if (has_y == has_z) {
            throw format_error("record must carry exactly one of \"y\" or \"z\"", lineno);
        }
        const int kind = has_y ? 1 : 2;
        if (first_kind == 0) {
            first_kind = kind;
            if (kind == 2 && !(ds.meta.lambda_z > 0.0)) {
                throw format_error("continuous records require lambda_z in meta", lineno);
            }
        } else if (kind != first_kind) {
            throw format_error("mixed record kinds", lineno);
        }

        const auto& wj = rec["w"];
        if (n_tokens < 0) {
            n_tokens = static_cast<int64_t>(wj.size());
            if (n_tokens < 1) throw format_error("empty token array", lineno);
        } else if (static_cast<int64_t>(wj.size()) != n_tokens) {
            throw format_error("ragged token array", lineno);
        }
        for (const auto& t : wj) {
            if (!t.is_number_integer()) throw format_error("non-integer token", lineno);
            const auto tok = t.get<int64_t>();
            if (tok < 0 || tok >= ds.meta.vocab) {
                throw format_error("token out of range", lineno);
            }
            w_flat.push_back(static_cast<int32_t>(tok));
        }
        const auto& tj = rec[has_y ? "y" : "z"];
        if (!tj.is_array() || static_cast<int64_t>(tj.size()) != ds.meta.dim) {
            throw format_error("ragged target vector", lineno);
        }
        if (has_y) {
            for (const auto& v : tj) {
                if (!v.is_number_integer()) throw format_error("non-integer target", lineno);
                const auto val = v.get<int64_t>();
                if (val < 0 || (ds.meta.classes > 0 && val >= ds.meta.classes)) {
                    throw format_error("target out of range", lineno);
                }
                y_flat.push_back(static_cast<int32_t>(val));
            }
        } else {
            for (const auto& v : tj) {
                if (!v.is_number()) throw format_error("non-numeric target", lineno);
                z_flat.push_back(std::llround(v.get<double>() / ds.meta.lambda_z));
            }
        }
        ++records;
    }
    if (records == 0) throw format_error("dataset has no records", lineno);

    ds.symbolic = first_kind == 1;
    ds.w = TokenMatrix(records, n_tokens);
    ds.w.tok = std::move(w_flat);
    if (ds.symbolic) {
        if (ds.meta.classes == 0) {
            // infer when the writer omitted it
            int32_t mx = 1;
            for (const int32_t v : y_flat) mx = std::max(mx, v);
            ds.meta.classes = mx + 1;
        }
        ds.y = TokenMatrix(records, ds.meta.dim);
        ds.y.tok = std::move(y_flat);
    } else {
        ds.z = QuantizedMatrix(records, ds.meta.dim, {ds.meta.lambda_z});
        ds.z.idx = std::move(z_flat);
    }
    ds.validate();
    return ds;
}

Summary summarize(const Dataset& ds) {
    Summary s;
    s.records = ds.rows();
    s.dim = ds.meta.dim;
    s.vocab = ds.meta.vocab;
    s.symbolic = ds.symbolic;
    s.token_histogram.assign(static_cast<size_t>(ds.meta.vocab), 0);
    for (const int32_t t : ds.w.tok) ++s.token_histogram[static_cast<size_t>(t)];
    return s;
}

}  // namespace repc::data
