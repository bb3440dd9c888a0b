#include "robreg/instance_io.hpp"

#include "robreg/csv.hpp"
#include "robreg/errors.hpp"
#include "robreg/rng.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace robreg {

namespace {

constexpr const char* kMagic = "# robreg document v1";

Index parse_index(const std::string& s, std::size_t line) {
    const double v = parse_double(s, line);
    if (v < 0 || v != static_cast<double>(static_cast<Index>(v))) {
        throw ParseError("expected a non-negative integer, got '" + s + "'", line);
    }
    return static_cast<Index>(v);
}

std::vector<Index> split_indices(const std::string& s) {
    std::vector<Index> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_index(item, 0));
    return out;
}

Matrix as_column(const Vector& v) { return Matrix(v); }

}  // namespace

const std::string* Document::find(const std::string& key) const {
    for (const auto& [k, v] : header)
        if (k == key) return &v;
    return nullptr;
}

const std::string& Document::at(const std::string& key) const {
    if (const auto* v = find(key)) return *v;
    throw ParseError("missing header key '" + key + "'", 0);
}

const DocumentBlock* Document::block(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return &b;
    return nullptr;
}

void Document::set(const std::string& key, std::string value) {
    for (auto& [k, v] : header) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    header.emplace_back(key, std::move(value));
}

std::string join_indices(const std::vector<Index>& idx) {
    std::string out;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(idx[k]);
    }
    return out;
}

void write_document(std::ostream& out, const Document& doc) {
    out << kMagic << '\n';
    for (const auto& [k, v] : doc.header) {
        if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
            v.find('\n') != std::string::npos) {
            throw ParameterError("document header entries must be single-line key=value");
        }
        out << k << '=' << v << '\n';
    }
    for (const auto& b : doc.blocks) {
        out << '[' << b.name << ' ' << b.values.rows() << ' ' << b.values.cols() << "]\n";
        for (Index i = 0; i < b.values.rows(); ++i) {
            for (Index j = 0; j < b.values.cols(); ++j) {
                if (j) out << ' ';
                out << format_double(b.values(i, j));
            }
            out << '\n';
        }
    }
}

Document read_document(std::istream& in) {
    Document doc;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line) || line != kMagic) {
        throw ParseError("not a robreg document (missing '" + std::string(kMagic) + "')", 1);
    }
    ++lineno;
    DocumentBlock* current = nullptr;
    Index filled = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (current && filled != current->values.rows()) {
                throw ParseError("block '" + current->name + "' is short", lineno);
            }
            if (line.back() != ']') throw ParseError("bad block header", lineno);
            std::istringstream hs(line.substr(1, line.size() - 2));
            std::string name, rows, cols;
            if (!(hs >> name >> rows >> cols)) throw ParseError("bad block header", lineno);
            doc.blocks.push_back({name, Matrix(parse_index(rows, lineno), parse_index(cols, lineno))});
            current = &doc.blocks.back();
            filled = 0;
            continue;
        }
        if (!current) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
            doc.header.emplace_back(line.substr(0, eq), line.substr(eq + 1));
            continue;
        }
        if (filled >= current->values.rows()) {
            throw ParseError("too many rows in block '" + current->name + "'", lineno);
        }
        std::istringstream ls(line);
        std::string tok;
        Index j = 0;
        while (ls >> tok) {
            if (j >= current->values.cols()) throw ParseError("too many values in row", lineno);
            current->values(filled, j++) = parse_double(tok, lineno);
        }
        if (j != current->values.cols()) throw ParseError("too few values in row", lineno);
        ++filled;
    }
    if (current && filled != current->values.rows()) {
        throw ParseError("block '" + current->name + "' is short", lineno);
    }
    return doc;
}

void save_document(const std::filesystem::path& path, const Document& doc) {
    auto out = open_output(path);
    write_document(out, doc);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Document load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return read_document(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

Document to_document(const InstanceFile& instance) {
    Document doc;
    doc.header = instance.header;
    if (instance.is_sparse()) {
        const auto& s = instance.sparse();
        doc.set("kind", "sparse");
        doc.set("n", std::to_string(s.problem.n()));
        doc.set("d", std::to_string(s.problem.dim()));
        doc.set("corrupted", join_indices(s.corrupted));
        doc.blocks.push_back({"design", s.problem.design()});
        doc.blocks.push_back({"responses", as_column(s.problem.responses())});
        if (s.problem.truth()) doc.blocks.push_back({"truth", as_column(*s.problem.truth())});
        if (s.design_variances) doc.blocks.push_back({"design_variances", as_column(*s.design_variances)});
    } else {
        const auto& l = instance.lowrank();
        doc.set("kind", "lowrank");
        doc.set("n", std::to_string(l.problem.n()));
        doc.set("d1", std::to_string(l.problem.d1()));
        doc.set("d2", std::to_string(l.problem.d2()));
        doc.set("rank", std::to_string(l.truth_factors.rank_bound()));
        doc.set("layout", "column-major");
        doc.set("corrupted", join_indices(l.corrupted));
        doc.blocks.push_back({"measurements", l.problem.design()});
        doc.blocks.push_back({"responses", as_column(l.problem.responses())});
        if (l.problem.truth()) doc.blocks.push_back({"truth", *l.problem.truth()});
        if (l.design_variances) doc.blocks.push_back({"design_variances", as_column(*l.design_variances)});
    }
    return doc;
}

InstanceFile instance_from_document(const Document& doc) {
    auto need = [&doc](const std::string& name) -> const Matrix& {
        const auto* b = doc.block(name);
        if (!b) throw ParseError("missing block '" + name + "'", 0);
        return b->values;
    };
    auto column = [](const Matrix& m) -> Vector {
        if (m.cols() != 1) throw ParseError("expected a single-column block", 0);
        return m.col(0);
    };
    auto optional_column = [&](const std::string& name) -> std::optional<Vector> {
        if (const auto* b = doc.block(name)) return column(b->values);
        return std::nullopt;
    };
    const std::string corrupted_text = doc.find("corrupted") ? *doc.find("corrupted") : "";

    InstanceFile out{doc.header, SparseInstance{VectorProblem(Matrix::Zero(1, 1), Vector::Zero(1)), {}, {}}};
    const std::string& kind = doc.at("kind");
    if (kind == "sparse") {
        std::optional<Vector> truth = optional_column("truth");
        out.data = SparseInstance{VectorProblem(need("design"), column(need("responses")), truth),
                                  split_indices(corrupted_text), optional_column("design_variances")};
    } else if (kind == "lowrank") {
        const Index d1 = parse_index(doc.at("d1"), 0);
        const Index d2 = parse_index(doc.at("d2"), 0);
        const Index r = parse_index(doc.at("rank"), 0);
        std::optional<Matrix> truth;
        if (const auto* b = doc.block("truth")) truth = b->values;
        LowRankFactors factors = truth ? svd_top(*truth, r) : LowRankFactors::zeros(d1, d2, r);
        out.data = LowRankInstance{
            MatrixProblem(d1, d2, need("measurements"), column(need("responses")), truth),
            std::move(factors), split_indices(corrupted_text), optional_column("design_variances")};
    } else {
        throw ParseError("unknown instance kind '" + kind + "'", 0);
    }
    return out;
}

void save_instance(const std::filesystem::path& path, const InstanceFile& instance) {
    save_document(path, to_document(instance));
}

InstanceFile load_instance(const std::filesystem::path& path) {
    return instance_from_document(load_document(path));
}

std::uint64_t instance_fingerprint(const Matrix& design, const Vector& responses) {
    const std::string_view a(reinterpret_cast<const char*>(design.data()),
                             sizeof(double) * static_cast<std::size_t>(design.size()));
    const std::string_view b(reinterpret_cast<const char*>(responses.data()),
                             sizeof(double) * static_cast<std::size_t>(responses.size()));
    return splitmix64(fnv1a(a) ^ splitmix64(fnv1a(b)));
}

}  // namespace robreg
