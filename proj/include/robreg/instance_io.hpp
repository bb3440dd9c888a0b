#pragma once

// Text container for instances and estimates:
//
//   # robreg document v1
//   key=value            (header, order preserved)
//   ...
//   [name rows cols]     (numeric block, one matrix row per line,
//   v v v ...             17 significant digits, space separated)
//
// Matrix measurements are stored one per line as vec(X_i) in column-major
// order.

#include "robreg/datagen.hpp"
#include "robreg/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace robreg {

struct DocumentBlock {
    std::string name;
    Matrix values;
};

struct Document {
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<DocumentBlock> blocks;

    const std::string* find(const std::string& key) const;
    const std::string& at(const std::string& key) const;  // ParseError when missing
    const DocumentBlock* block(const std::string& name) const;
    void set(const std::string& key, std::string value);
};

void write_document(std::ostream& out, const Document& doc);
Document read_document(std::istream& in);
void save_document(const std::filesystem::path& path, const Document& doc);
Document load_document(const std::filesystem::path& path);

/// A generated (or loaded) instance together with its descriptive header.
struct InstanceFile {
    std::vector<std::pair<std::string, std::string>> header;
    std::variant<SparseInstance, LowRankInstance> data;

    bool is_sparse() const { return std::holds_alternative<SparseInstance>(data); }
    const SparseInstance& sparse() const { return std::get<SparseInstance>(data); }
    const LowRankInstance& lowrank() const { return std::get<LowRankInstance>(data); }
};

Document to_document(const InstanceFile& instance);
InstanceFile instance_from_document(const Document& doc);

void save_instance(const std::filesystem::path& path, const InstanceFile& instance);
InstanceFile load_instance(const std::filesystem::path& path);

/// FNV-1a over the bytes of the design and responses; equal fingerprints mean
/// solvers saw the same data.
std::uint64_t instance_fingerprint(const Matrix& design, const Vector& responses);

std::string join_indices(const std::vector<Index>& idx);

}  // namespace robreg
