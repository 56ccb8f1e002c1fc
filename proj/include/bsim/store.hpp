#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsim/model.hpp"

// On-disk catalog layout:
//   root/catalog.tsv                          settings, scales, dictionaries
//   root/units/seg<NNNN>.tsv                  position dictionaries
//   root/manifest.tsv                         partition index with checksums
//   root/{expose|metric|dimension}/<key>/seg<NNNN>.bsi
// Files are written to a temp name and renamed; readers never see partial
// writes. Output bytes are deterministic for identical input.

namespace bsim::store {

namespace fs = std::filesystem;

void init_root(const fs::path& root, const model::Catalog& catalog);
bool root_exists(const fs::path& root);

void catalog_save(const fs::path& root, const model::Catalog& catalog);
model::Catalog catalog_load(const fs::path& root);

void units_save(const fs::path& root, const model::UnitIndex& units);
model::UnitIndex units_load(const fs::path& root, const model::Catalog& catalog);

// One table partition: per-segment serialized blocks.
struct Partition {
    std::string kind; // expose | metric | dimension
    std::string key;  // strategy-id | id@YYYYMMDD
    std::vector<std::vector<uint8_t>> blocks;
};

void write_partition(const fs::path& root, const Partition& partition);
// Loads the named segments (all when std::nullopt); blocks are checksum
// verified against the manifest.
Partition read_partition(const fs::path& root, const std::string& kind, const std::string& key,
                         std::optional<std::vector<uint32_t>> segments = std::nullopt);
bool has_partition(const fs::path& root, const std::string& kind, const std::string& key);
std::vector<std::string> list_partitions(const fs::path& root, const std::string& kind);

// typed block codecs
std::vector<uint8_t> encode_expose_block(const model::ExposeColumn& column);
model::ExposeColumn decode_expose_block(std::span<const uint8_t> bytes);
std::vector<uint8_t> encode_value_block(const Bsi& value);
Bsi decode_value_block(std::span<const uint8_t> bytes);

std::string value_key(const std::string& id, int64_t date);

void write_expose(const fs::path& root, const std::string& strategy,
                  std::span<const model::ExposeColumn> columns);
std::vector<model::ExposeColumn> read_expose(const fs::path& root, const model::Catalog& catalog,
                                             const std::string& strategy);
void write_values(const fs::path& root, const std::string& kind, const std::string& id,
                  int64_t date, std::span<const Bsi> segments);
std::vector<Bsi> read_values(const fs::path& root, const model::Catalog& catalog,
                             const std::string& kind, const std::string& id, int64_t date);

} // namespace bsim::store
