#include "edgekit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "edgekit/serde.hpp"

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

namespace edgekit {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'E', 'D', 'G', 'E', 'K', 'I', 'T', '\x01'};
constexpr const char* kDtype = sizeof(Real) == 8 ? "f64" : "f32";

void write_u64(std::ostream& out, std::uint64_t x) {
    out.write(reinterpret_cast<const char*>(&x), sizeof(x));
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    std::uint64_t x = 0;
    in.read(reinterpret_cast<char*>(&x), sizeof(x));
    require(in.good(), path, ": truncated container");
    return x;
}

struct TensorRef {
    std::string name;
    const Tensor* tensor;
};

void write_container(const std::string& path, json header,
                     const std::vector<TensorRef>& tensors) {
    json dir = json::array();
    for (const auto& t : tensors)
        dir.push_back(json{{"name", t.name},
                           {"rows", t.tensor->n_rows},
                           {"cols", t.tensor->n_cols},
                           {"dtype", kDtype}});
    header["tensors"] = std::move(dir);
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open ", path, " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : tensors)
        out.write(reinterpret_cast<const char*>(t.tensor->v.data()),
                  static_cast<std::streamsize>(t.tensor->v.size() * sizeof(Real)));
    out.flush();
    require(out.good(), "failed writing ", path);
}

struct LoadedContainer {
    json header;
    std::vector<Tensor> tensors;  // directory order

    const Tensor& tensor(const std::string& name) const {
        const json& dir = header.at("tensors");
        for (size_t i = 0; i < dir.size(); ++i)
            if (dir[i].at("name").get<std::string>() == name) return tensors[i];
        fail("container has no tensor named '", name, "'");
    }
};

LoadedContainer read_container(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open ", path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    require(in.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, path,
            " is not an edgekit container");
    const std::uint64_t header_len = read_u64(in, path);
    std::string text(header_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_len));
    require(in.good(), path, ": truncated header");

    LoadedContainer c;
    c.header = json::parse(text, nullptr, /*allow_exceptions=*/false);
    require(!c.header.is_discarded(), path, ": header is not valid JSON");
    const std::string kind = c.header.value("container", "");
    require(kind == expected_kind, path, " holds a '", kind, "' container, expected '",
            expected_kind, "'");

    for (const json& entry : c.header.at("tensors")) {
        const std::string dtype = entry.at("dtype").get<std::string>();
        require(dtype == kDtype, path, ": tensor '", entry.at("name").get<std::string>(),
                "' stored as ", dtype, " but this build uses ", kDtype);
        Tensor t(entry.at("rows").get<size_t>(), entry.at("cols").get<size_t>());
        in.read(reinterpret_cast<char*>(t.v.data()),
                static_cast<std::streamsize>(t.v.size() * sizeof(Real)));
        require(in.good(), path, ": truncated tensor data");
        c.tensors.push_back(std::move(t));
    }
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParserModel& m) {
    json header{{"container", "checkpoint"},
                {"version", 1},
                {"model", m.config},
                {"vocab", m.vocab},
                {"vocab_hash", m.vocab.hash()},
                {"param_hash", m.param_hash()},
                {"dev_score", m.dev_score},
                {"best_epoch", m.best_epoch}};
    json freezes = json::object();
    std::vector<TensorRef> tensors;
    for (const Parameter* p : m.store.all()) {
        tensors.push_back(TensorRef{p->name, &p->value});
        if (!p->frozen_rows.empty()) freezes[p->name] = p->frozen_rows;
    }
    if (!freezes.empty()) header["frozen_rows"] = std::move(freezes);
    write_container(path, std::move(header), tensors);
}

ParserModel load_checkpoint(const std::string& path) {
    LoadedContainer c = read_container(path, "checkpoint");
    ParserModel m;
    c.header.at("model").get_to(m.config);
    c.header.at("vocab").get_to(m.vocab);
    const auto stored_hash = c.header.at("vocab_hash").get<std::uint64_t>();
    require(stored_hash == m.vocab.hash(), path,
            ": vocabulary hash mismatch (file corrupt or written by an incompatible build)");
    m.dev_score = c.header.value("dev_score", Real(-1));
    m.best_epoch = c.header.value("best_epoch", std::uint64_t(0));

    const json& dir = c.header.at("tensors");
    for (size_t i = 0; i < dir.size(); ++i) {
        const std::string name = dir[i].at("name").get<std::string>();
        Parameter& p = m.store.create(name, c.tensors[i].n_rows, c.tensors[i].n_cols);
        p.value = std::move(c.tensors[i]);
        if (c.header.contains("frozen_rows") && c.header["frozen_rows"].contains(name))
            c.header["frozen_rows"][name].get_to(p.frozen_rows);
    }
    m.enc = bind_encoder(m.store, m.config.encoder);
    m.edge = bind_edge_model(m.store);

    const auto stored_params = c.header.at("param_hash").get<std::uint64_t>();
    require(stored_params == m.param_hash(), path, ": parameter hash mismatch, file corrupt");
    return m;
}

void save_summary(const std::string& path, const SupportSummary& s) {
    json header{{"container", "summary"},
                {"version", 1},
                {"similarity", to_string(s.kind)},
                {"param_hash", s.param_hash},
                {"head_count", s.head_count},
                {"label_counts", s.label_counts}};
    write_container(path, std::move(header),
                    {TensorRef{"h_sum_head", &s.h_sum_head},
                     TensorRef{"h_sum_label", &s.h_sum_label}});
}

SupportSummary load_summary(const std::string& path) {
    LoadedContainer c = read_container(path, "summary");
    SupportSummary s;
    s.kind = similarity_from_string(c.header.at("similarity").get<std::string>());
    s.param_hash = c.header.at("param_hash").get<std::uint64_t>();
    s.head_count = c.header.at("head_count").get<std::uint64_t>();
    c.header.at("label_counts").get_to(s.label_counts);
    s.h_sum_head = c.tensor("h_sum_head");
    s.h_sum_label = c.tensor("h_sum_label");
    require(s.h_sum_label.n_rows == s.label_counts.size(), path,
            ": label sum rows do not match label counts");
    return s;
}

void save_explain_index(const std::string& path, const ExplainIndex& idx) {
    json entries = json::array();
    for (const auto& e : idx.entries)
        entries.push_back(json::array(
            {e.sentence_id, e.head_index, e.dep_index, e.label_id, e.head_form, e.dep_form}));
    json header{{"container", "explain-index"},
                {"version", 1},
                {"param_hash", idx.param_hash},
                {"entries", std::move(entries)}};
    Tensor norms(1, idx.norms.size(), std::vector<Real>(idx.norms));
    write_container(path, std::move(header),
                    {TensorRef{"vectors", &idx.vectors}, TensorRef{"norms", &norms}});
}

ExplainIndex load_explain_index(const std::string& path) {
    LoadedContainer c = read_container(path, "explain-index");
    ExplainIndex idx;
    idx.param_hash = c.header.at("param_hash").get<std::uint64_t>();
    idx.vectors = c.tensor("vectors");
    idx.norms = c.tensor("norms").v;
    for (const json& e : c.header.at("entries")) {
        ExplainEntry entry;
        entry.sentence_id = e.at(0).get<std::uint32_t>();
        entry.head_index = e.at(1).get<std::uint16_t>();
        entry.dep_index = e.at(2).get<std::uint16_t>();
        entry.label_id = e.at(3).get<std::int32_t>();
        entry.head_form = e.at(4).get<std::string>();
        entry.dep_form = e.at(5).get<std::string>();
        idx.entries.push_back(std::move(entry));
    }
    require(idx.entries.size() == idx.vectors.n_rows && idx.entries.size() == idx.norms.size(),
            path, ": entry count does not match stored vectors");
    return idx;
}

}  // namespace edgekit
