#include "bsim/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bsim/dates.hpp"
#include "bsim/detail/bytes.hpp"
#include "bsim/detail/crc32.hpp"

namespace bsim::store {

namespace {

constexpr uint32_t kBlockMagic = 0x42534D42;
constexpr uint8_t kBlockVersion = 1;
constexpr uint8_t kExposeBlock = 0;
constexpr uint8_t kValueBlock = 1;

void validate_name(const std::string& s, const char* what) {
    if (s.empty()) throw Error(Errc::InvalidArgument, std::string(what) + " is empty");
    for (char c : s) {
        bool ok = std::isalnum(uint8_t(c)) || c == '_' || c == '-' || c == '.' || c == '@';
        if (!ok)
            throw Error(Errc::InvalidArgument,
                        std::string(what) + " '" + s + "' has characters unsafe for paths");
    }
}

void validate_cell(const std::string& s, const char* what) {
    for (char c : s)
        if (c == '\t' || c == '\n' || c == '\r')
            throw Error(Errc::InvalidArgument, std::string(what) + " contains tab or newline");
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) throw Error(Errc::IoError, "failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::string crc_hex(const std::string& content) {
    char buf[16];
    snprintf(buf, sizeof buf, "%08x", detail::crc32(content.data(), content.size()));
    return buf;
}

// text file with a version header and a trailing checksum row
void save_checked_tsv(const fs::path& path, const std::string& body) {
    std::string content = "version\t1\n" + body;
    content += "checksum\t" + crc_hex(content) + "\n";
    write_file_atomic(path, content);
}

std::vector<std::string> load_checked_tsv(const fs::path& path) {
    std::string content = read_file(path);
    if (content.empty() || content.back() != '\n')
        throw Error(Errc::Malformed, path.string() + " not newline-terminated");
    size_t prev_nl = content.rfind('\n', content.size() - 2);
    size_t last_line = prev_nl == std::string::npos ? 0 : prev_nl + 1;
    std::string body = content.substr(0, last_line);
    std::string tail = content.substr(last_line);
    if (tail.rfind("checksum\t", 0) != 0)
        throw Error(Errc::ChecksumMismatch, path.string() + " has no checksum row");
    if (tail != "checksum\t" + crc_hex(body) + "\n")
        throw Error(Errc::ChecksumMismatch, path.string());

    std::vector<std::string> lines;
    std::istringstream ss(body);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    if (lines.empty() || split_tabs(lines[0]).size() != 2 || split_tabs(lines[0])[0] != "version")
        throw Error(Errc::Malformed, path.string() + " missing version header");
    if (split_tabs(lines[0])[1] != "1")
        throw Error(Errc::VersionSkew, path.string() + " version " + split_tabs(lines[0])[1]);
    lines.erase(lines.begin());
    return lines;
}

std::string segment_file(uint32_t seg) {
    char buf[16];
    snprintf(buf, sizeof buf, "seg%04u.bsi", seg);
    return buf;
}

struct ManifestRow {
    std::string kind, key;
    uint32_t segment;
    uint64_t bytes;
    std::string crc;
    auto tie() const { return std::tie(kind, key, segment); }
    bool operator<(const ManifestRow& o) const { return tie() < o.tie(); }
};

std::vector<ManifestRow> manifest_load(const fs::path& root) {
    fs::path path = root / "manifest.tsv";
    if (!fs::exists(path)) throw Error(Errc::IoError, "no manifest at " + root.string());
    std::vector<ManifestRow> rows;
    for (const std::string& line : load_checked_tsv(path)) {
        auto cells = split_tabs(line);
        if (cells.size() != 5) throw Error(Errc::Malformed, "manifest row: " + line);
        rows.push_back({cells[0], cells[1], uint32_t(std::stoul(cells[2])),
                        uint64_t(std::stoull(cells[3])), cells[4]});
    }
    return rows;
}

void manifest_save(const fs::path& root, std::vector<ManifestRow> rows) {
    std::sort(rows.begin(), rows.end());
    std::string body;
    for (const ManifestRow& r : rows) {
        body += r.kind + "\t" + r.key + "\t" + std::to_string(r.segment) + "\t" +
                std::to_string(r.bytes) + "\t" + r.crc + "\n";
    }
    save_checked_tsv(root / "manifest.tsv", body);
}

} // namespace

// --- root / catalog -------------------------------------------------------------

bool root_exists(const fs::path& root) { return fs::exists(root / "catalog.tsv"); }

void init_root(const fs::path& root, const model::Catalog& catalog) {
    if (root_exists(root))
        throw Error(Errc::InvalidArgument, "catalog already exists at " + root.string());
    fs::create_directories(root);
    catalog_save(root, catalog);
    units_save(root, model::UnitIndex(catalog.segment_count()));
    manifest_save(root, {});
}

void catalog_save(const fs::path& root, const model::Catalog& catalog) {
    std::string body;
    body += "segments\t" + std::to_string(catalog.segment_count()) + "\n";
    body += "buckets\t" + std::to_string(catalog.bucket_count()) + "\n";
    body += std::string("shared_units\t") + (catalog.shared_units() ? "1" : "0") + "\n";
    body += "hash\tfnv1a64-fmix64\n";
    body += "segment_salt\t00\n";
    body += "bucket_salt\t01\n";
    for (const auto& [id, info] : catalog.metrics()) {
        validate_cell(id, "metric id");
        body += "metric\t" + id + "\t" + std::to_string(info.scale) + "\n";
    }
    for (const auto& [name, info] : catalog.dimensions()) {
        validate_cell(name, "dimension name");
        body += "dimension\t" + name + "\t" + (info.categorical ? "categorical" : "numeric") + "\n";
        for (size_t i = 0; i < info.values.size(); ++i) {
            validate_cell(info.values[i], "dimension value");
            body += "dimvalue\t" + name + "\t" + std::to_string(i + 1) + "\t" + info.values[i] +
                    "\n";
        }
    }
    save_checked_tsv(root / "catalog.tsv", body);
}

model::Catalog catalog_load(const fs::path& root) {
    auto lines = load_checked_tsv(root / "catalog.tsv");
    uint32_t segments = 0, buckets = 0;
    bool shared = false;
    std::vector<std::vector<std::string>> deferred;
    for (const std::string& line : lines) {
        auto cells = split_tabs(line);
        if (cells[0] == "segments")
            segments = uint32_t(std::stoul(cells.at(1)));
        else if (cells[0] == "buckets")
            buckets = uint32_t(std::stoul(cells.at(1)));
        else if (cells[0] == "shared_units")
            shared = cells.at(1) == "1";
        else if (cells[0] == "hash" || cells[0] == "segment_salt" || cells[0] == "bucket_salt")
            continue; // informational
        else if (cells[0] == "metric" || cells[0] == "dimension" || cells[0] == "dimvalue")
            deferred.push_back(cells);
        else
            throw Error(Errc::Malformed, "unknown catalog row: " + line);
    }
    if (segments == 0 || buckets == 0)
        throw Error(Errc::Malformed, "catalog missing segment/bucket counts");
    model::Catalog catalog(segments, buckets, shared);
    for (const auto& cells : deferred) {
        if (cells[0] == "metric") {
            catalog.register_metric(cells.at(1), std::stoull(cells.at(2)));
        } else if (cells[0] == "dimension") {
            catalog.register_dimension(cells.at(1), cells.at(2) == "categorical");
        } else {
            uint64_t code = catalog.dimension_code_assign(cells.at(1), cells.at(3));
            if (code != std::stoull(cells.at(2)))
                throw Error(Errc::Malformed, "dimension codes out of order for " + cells.at(1));
        }
    }
    return catalog;
}

// --- unit dictionaries ------------------------------------------------------------

void units_save(const fs::path& root, const model::UnitIndex& units) {
    for (uint32_t s = 0; s < units.segment_count(); ++s) {
        std::string body;
        for (const std::string& id : units.segment(s).ids()) {
            validate_cell(id, "unit id");
            body += id + "\n";
        }
        char name[16];
        snprintf(name, sizeof name, "seg%04u.tsv", s);
        save_checked_tsv(root / "units" / name, body);
    }
}

model::UnitIndex units_load(const fs::path& root, const model::Catalog& catalog) {
    model::UnitIndex units(catalog.segment_count());
    for (uint32_t s = 0; s < catalog.segment_count(); ++s) {
        char name[16];
        snprintf(name, sizeof name, "seg%04u.tsv", s);
        fs::path path = root / "units" / name;
        if (!fs::exists(path))
            throw Error(Errc::MissingSegment, "unit dictionary " + path.string());
        for (const std::string& id : load_checked_tsv(path)) units.segment(s).get_or_assign(id);
    }
    return units;
}

// --- partitions --------------------------------------------------------------------

void write_partition(const fs::path& root, const Partition& partition) {
    validate_name(partition.kind, "partition kind");
    validate_name(partition.key, "partition key");
    auto rows = manifest_load(root);
    std::erase_if(rows, [&](const ManifestRow& r) {
        return r.kind == partition.kind && r.key == partition.key;
    });
    for (uint32_t s = 0; s < partition.blocks.size(); ++s) {
        const auto& block = partition.blocks[s];
        fs::path path = root / partition.kind / partition.key / segment_file(s);
        write_file_atomic(path, std::string(block.begin(), block.end()));
        rows.push_back({partition.kind, partition.key, s, block.size(),
                        crc_hex(std::string(block.begin(), block.end()))});
    }
    manifest_save(root, std::move(rows));
}

Partition read_partition(const fs::path& root, const std::string& kind, const std::string& key,
                         std::optional<std::vector<uint32_t>> segments) {
    auto rows = manifest_load(root);
    std::map<uint32_t, const ManifestRow*> by_segment;
    for (const ManifestRow& r : rows)
        if (r.kind == kind && r.key == key) by_segment[r.segment] = &r;
    if (by_segment.empty())
        throw Error(Errc::MissingPartition, kind + "/" + key);

    std::vector<uint32_t> wanted;
    if (segments) {
        wanted = *segments;
    } else {
        for (auto& [s, _] : by_segment) wanted.push_back(s);
    }

    Partition out{kind, key, {}};
    uint32_t max_seg = 0;
    for (uint32_t s : wanted) max_seg = std::max(max_seg, s);
    out.blocks.resize(max_seg + 1);
    for (uint32_t s : wanted) {
        auto it = by_segment.find(s);
        if (it == by_segment.end())
            throw Error(Errc::MissingSegment, kind + "/" + key + " segment " + std::to_string(s));
        std::string bytes = read_file(root / kind / key / segment_file(s));
        if (bytes.size() != it->second->bytes || crc_hex(bytes) != it->second->crc)
            throw Error(Errc::ChecksumMismatch,
                        kind + "/" + key + " segment " + std::to_string(s));
        out.blocks[s].assign(bytes.begin(), bytes.end());
    }
    return out;
}

bool has_partition(const fs::path& root, const std::string& kind, const std::string& key) {
    for (const ManifestRow& r : manifest_load(root))
        if (r.kind == kind && r.key == key) return true;
    return false;
}

std::vector<std::string> list_partitions(const fs::path& root, const std::string& kind) {
    std::vector<std::string> keys;
    for (const ManifestRow& r : manifest_load(root))
        if (r.kind == kind && (keys.empty() || keys.back() != r.key)) keys.push_back(r.key);
    return keys;
}

// --- typed blocks ---------------------------------------------------------------------

std::vector<uint8_t> encode_expose_block(const model::ExposeColumn& column) {
    std::vector<uint8_t> out;
    detail::ByteWriter w(out);
    w.u32(kBlockMagic);
    w.u8(kBlockVersion);
    w.u8(kExposeBlock);
    w.u64(uint64_t(column.min_date));
    std::vector<uint8_t> offset = column.offset.serialize();
    std::vector<uint8_t> bucket = column.bucket.serialize();
    w.u32(uint32_t(offset.size()));
    w.bytes(offset.data(), offset.size());
    w.u32(uint32_t(bucket.size()));
    w.bytes(bucket.data(), bucket.size());
    return out;
}

namespace {

detail::ByteReader open_block(std::span<const uint8_t> bytes, uint8_t expected_kind) {
    detail::ByteReader r(bytes);
    if (r.u32() != kBlockMagic) throw Error(Errc::BadMagic, "not a partition block");
    if (r.u8() != kBlockVersion) throw Error(Errc::VersionSkew, "unknown block version");
    if (r.u8() != expected_kind) throw Error(Errc::Malformed, "unexpected block kind");
    return r;
}

} // namespace

model::ExposeColumn decode_expose_block(std::span<const uint8_t> bytes) {
    detail::ByteReader r = open_block(bytes, kExposeBlock);
    model::ExposeColumn col;
    col.min_date = int64_t(r.u64());
    uint32_t n = r.u32();
    col.offset = Bsi::deserialize(r.bytes(n));
    n = r.u32();
    col.bucket = Bsi::deserialize(r.bytes(n));
    if (!r.done()) throw Error(Errc::Malformed, "trailing bytes in expose block");
    return col;
}

std::vector<uint8_t> encode_value_block(const Bsi& value) {
    std::vector<uint8_t> out;
    detail::ByteWriter w(out);
    w.u32(kBlockMagic);
    w.u8(kBlockVersion);
    w.u8(kValueBlock);
    std::vector<uint8_t> payload = value.serialize();
    w.u32(uint32_t(payload.size()));
    w.bytes(payload.data(), payload.size());
    return out;
}

Bsi decode_value_block(std::span<const uint8_t> bytes) {
    detail::ByteReader r = open_block(bytes, kValueBlock);
    uint32_t n = r.u32();
    Bsi value = Bsi::deserialize(r.bytes(n));
    if (!r.done()) throw Error(Errc::Malformed, "trailing bytes in value block");
    return value;
}

std::string value_key(const std::string& id, int64_t date) {
    return id + "@" + dates::format_day(date);
}

void write_expose(const fs::path& root, const std::string& strategy,
                  std::span<const model::ExposeColumn> columns) {
    Partition p{"expose", strategy, {}};
    for (const model::ExposeColumn& col : columns) p.blocks.push_back(encode_expose_block(col));
    write_partition(root, p);
}

std::vector<model::ExposeColumn> read_expose(const fs::path& root, const model::Catalog& catalog,
                                             const std::string& strategy) {
    Partition p = read_partition(root, "expose", strategy);
    if (p.blocks.size() != catalog.segment_count())
        throw Error(Errc::MissingSegment, "expose/" + strategy + " segment count mismatch");
    std::vector<model::ExposeColumn> out;
    out.reserve(p.blocks.size());
    for (const auto& block : p.blocks) out.push_back(decode_expose_block(block));
    return out;
}

void write_values(const fs::path& root, const std::string& kind, const std::string& id,
                  int64_t date, std::span<const Bsi> segments) {
    Partition p{kind, value_key(id, date), {}};
    for (const Bsi& value : segments) p.blocks.push_back(encode_value_block(value));
    write_partition(root, p);
}

std::vector<Bsi> read_values(const fs::path& root, const model::Catalog& catalog,
                             const std::string& kind, const std::string& id, int64_t date) {
    Partition p = read_partition(root, kind, value_key(id, date));
    if (p.blocks.size() != catalog.segment_count())
        throw Error(Errc::MissingSegment, kind + "/" + value_key(id, date) + " segment count");
    std::vector<Bsi> out;
    out.reserve(p.blocks.size());
    for (const auto& block : p.blocks) out.push_back(decode_value_block(block));
    return out;
}

} // namespace bsim::store
