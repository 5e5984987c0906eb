#include "prl/ingest.hpp"

#include "prl/error.hpp"
#include "prl/tsv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace prl {

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

const SlideEntry& CohortManifest::slide(const std::string& slide_id) const {
    auto it = slide_index.find(slide_id);
    if (it == slide_index.end())
        throw ValidationError("unknown slide_id '" + slide_id + "'");
    return slides[it->second];
}

std::vector<std::string> CohortManifest::patient_ids() const {
    std::set<std::string> s;
    for (const auto& e : slides) s.insert(e.patient_id);
    return {s.begin(), s.end()};
}

std::vector<std::string> CohortManifest::institution_ids() const {
    std::set<std::string> s;
    for (const auto& e : slides) s.insert(e.institution_id);
    return {s.begin(), s.end()};
}

void CohortManifest::rebuild_index() {
    slide_index.clear();
    for (std::size_t i = 0; i < slides.size(); ++i)
        slide_index.emplace(slides[i].slide_id, i);
}

void CohortManifest::validate(const std::vector<std::string>& expected_labels) const {
    std::set<std::string> seen;
    std::unordered_map<std::string, std::string> patient_institution;
    std::set<std::string> labels(expected_labels.begin(), expected_labels.end());
    for (const auto& e : slides) {
        if (e.slide_id.empty())
            throw ValidationError("manifest: empty slide_id");
        if (!seen.insert(e.slide_id).second)
            throw ValidationError("manifest: duplicate slide_id '" + e.slide_id + "'");
        if (e.patient_id.empty())
            throw ValidationError("manifest: slide '" + e.slide_id + "' has empty patient_id");
        if (e.institution_id.empty())
            throw ValidationError("manifest: slide '" + e.slide_id + "' has empty institution_id");
        if (!expected_labels.empty() && !e.label.empty() && !labels.count(e.label))
            throw ValidationError("manifest: slide '" + e.slide_id + "' has unknown label '" +
                                  e.label + "'");
        // A patient split across institutions would leak across
        // institution-disjoint folds; reject at ingest.
        auto [it, inserted] = patient_institution.emplace(e.patient_id, e.institution_id);
        if (!inserted && it->second != e.institution_id)
            throw ValidationError("manifest: patient '" + e.patient_id +
                                  "' appears in institutions '" + it->second + "' and '" +
                                  e.institution_id + "'");
    }
}

CohortManifest load_manifest(const std::string& path,
                             const std::vector<std::string>& expected_labels) {
    const TsvTable t = read_tsv(path);
    const std::size_t c_slide = t.column_index("slide_id");
    const std::size_t c_patient = t.column_index("patient_id");
    const std::size_t c_inst = t.column_index("institution_id");
    const auto c_label = t.find_column("label");

    CohortManifest m;
    m.cohort_id = path;
    std::set<std::string> labels(expected_labels.begin(), expected_labels.end());
    for (const auto& row : t.rows) {
        SlideEntry e;
        e.slide_id = row[c_slide];
        e.patient_id = row[c_patient];
        e.institution_id = row[c_inst];
        if (c_label) e.label = row[*c_label];
        if (!e.label.empty()) labels.insert(e.label);
        m.slides.push_back(std::move(e));
    }
    m.label_set.assign(labels.begin(), labels.end());
    m.validate(expected_labels);
    m.rebuild_index();
    return m;
}

void write_manifest(const std::string& path, const CohortManifest& m) {
    TsvTable t;
    t.columns = {"slide_id", "patient_id", "institution_id", "label"};
    for (const auto& e : m.slides)
        t.rows.push_back({e.slide_id, e.patient_id, e.institution_id, e.label});
    persist_bytes(path, serialize_tsv(t));
}

// ---------------------------------------------------------------------------
// Survival
// ---------------------------------------------------------------------------

const char* endpoint_name(SurvivalEndpoint e) {
    return e == SurvivalEndpoint::overall_survival ? "overall_survival" : "recurrence_free";
}

SurvivalEndpoint parse_endpoint(const std::string& s) {
    if (s == "overall_survival" || s == "os") return SurvivalEndpoint::overall_survival;
    if (s == "recurrence_free" || s == "rfs") return SurvivalEndpoint::recurrence_free;
    throw ParseError("unknown survival endpoint '" + s + "'");
}

const SurvivalRecord* SurvivalTable::find(const std::string& patient_id,
                                          SurvivalEndpoint e) const {
    for (const auto& r : rows)
        if (r.endpoint == e && r.patient_id == patient_id) return &r;
    return nullptr;
}

std::size_t SurvivalTable::event_count(SurvivalEndpoint e) const {
    std::size_t n = 0;
    for (const auto& r : rows)
        if (r.endpoint == e && r.event == 1) ++n;
    return n;
}

SurvivalTable load_survival(const std::string& path) {
    const TsvTable t = read_tsv(path);
    const std::size_t c_patient = t.column_index("patient_id");
    const std::size_t c_time = t.column_index("time_months");
    const std::size_t c_event = t.column_index("event");
    const std::size_t c_end = t.column_index("endpoint");

    SurvivalTable out;
    std::set<std::pair<std::string, int>> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        SurvivalRecord r;
        r.patient_id = row[c_patient];
        r.time_months = parse_double(row[c_time], path);
        const long long ev = parse_int(row[c_event], path);
        r.endpoint = parse_endpoint(row[c_end]);
        if (r.patient_id.empty())
            throw ValidationError(path + ": empty patient_id");
        if (!(r.time_months > 0.0))
            throw ValidationError(path + ": non-positive time for patient '" + r.patient_id + "'");
        if (ev != 0 && ev != 1)
            throw ValidationError(path + ": event must be 0 or 1 for patient '" + r.patient_id + "'");
        r.event = static_cast<int>(ev);
        if (!seen.insert({r.patient_id, static_cast<int>(r.endpoint)}).second)
            throw ValidationError(path + ": duplicate (patient, endpoint) row for '" +
                                  r.patient_id + "'");
        out.rows.push_back(std::move(r));
    }
    return out;
}

void write_survival(const std::string& path, const SurvivalTable& t) {
    TsvTable out;
    out.columns = {"patient_id", "time_months", "event", "endpoint"};
    for (const auto& r : t.rows)
        out.rows.push_back({r.patient_id, format_double(r.time_months),
                            std::to_string(r.event), endpoint_name(r.endpoint)});
    persist_bytes(path, serialize_tsv(out));
}

// ---------------------------------------------------------------------------
// Tile records
// ---------------------------------------------------------------------------

std::vector<TileRecord> load_tile_records(const std::string& path) {
    const TsvTable t = read_tsv(path);
    const std::size_t c_tile = t.column_index("tile_id");
    const std::size_t c_slide = t.column_index("slide_id");
    const std::size_t c_row = t.column_index("row");
    const std::size_t c_col = t.column_index("col");
    const std::size_t c_frac = t.column_index("tissue_fraction");
    const auto c_path = t.find_column("path");

    std::vector<TileRecord> out;
    std::set<std::string> tile_ids;
    std::set<std::tuple<std::string, int, int>> grid;
    for (const auto& row : t.rows) {
        TileRecord r;
        r.tile_id = row[c_tile];
        r.slide_id = row[c_slide];
        r.row = static_cast<int>(parse_int(row[c_row], path));
        r.col = static_cast<int>(parse_int(row[c_col], path));
        r.tissue_fraction = parse_double(row[c_frac], path);
        if (c_path) r.path = row[*c_path];
        if (!(r.tissue_fraction >= 0.0 && r.tissue_fraction <= 1.0))
            throw ValidationError(path + ": tissue_fraction out of [0,1] for tile '" +
                                  r.tile_id + "'");
        if (!tile_ids.insert(r.tile_id).second)
            throw ValidationError(path + ": duplicate tile_id '" + r.tile_id + "'");
        if (!grid.insert({r.slide_id, r.row, r.col}).second)
            throw ValidationError(path + ": duplicate (slide,row,col) for tile '" + r.tile_id + "'");
        out.push_back(std::move(r));
    }
    return out;
}

void write_tile_records(const std::string& path, const std::vector<TileRecord>& tiles) {
    TsvTable t;
    t.columns = {"tile_id", "slide_id", "row", "col", "tissue_fraction", "path"};
    for (const auto& r : tiles)
        t.rows.push_back({r.tile_id, r.slide_id, std::to_string(r.row), std::to_string(r.col),
                          format_double(r.tissue_fraction), r.path});
    persist_bytes(path, serialize_tsv(t));
}

// ---------------------------------------------------------------------------
// Embedding binary: "PRLE", version u16, N u64, D u32, N*D little-endian
// f32 row-major, then N ids, each u32 length + UTF-8 bytes.
// ---------------------------------------------------------------------------

void EmbeddingMatrix::validate() const {
    if (dim == 0)
        throw ValidationError("embeddings: dimension must be positive");
    if (data.size() != tile_ids.size() * dim)
        throw ValidationError("embeddings: row count does not match tile_ids length");
    for (const float v : data)
        if (!std::isfinite(v))
            throw ValidationError("embeddings: non-finite entry");
}

namespace {

constexpr char kEmbeddingMagic[4] = {'P', 'R', 'L', 'E'};
constexpr std::uint16_t kEmbeddingVersion = 1;

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos, const std::string& what) {
    if (pos + sizeof(T) > in.size())
        throw ParseError("embeddings: truncated payload reading " + what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

} // namespace

void write_embeddings(const std::string& path, const EmbeddingMatrix& e) {
    e.validate();
    std::string out;
    out.reserve(16 + e.data.size() * 4 + e.tile_ids.size() * 16);
    out.append(kEmbeddingMagic, 4);
    put_le<std::uint16_t>(out, kEmbeddingVersion);
    put_le<std::uint64_t>(out, e.rows());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.dim));
    for (const float v : e.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_le<std::uint32_t>(out, bits);
    }
    for (const auto& id : e.tile_ids) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
        out.append(id);
    }
    persist_bytes(path, out);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
    const std::string in = load_bytes(path);
    std::size_t pos = 0;
    if (in.size() < 4 || std::memcmp(in.data(), kEmbeddingMagic, 4) != 0)
        throw ParseError("embeddings: bad magic in '" + path + "'");
    pos = 4;
    const auto version = get_le<std::uint16_t>(in, pos, "version");
    if (version != kEmbeddingVersion)
        throw ParseError("embeddings: unsupported version " + std::to_string(version));
    const auto n = get_le<std::uint64_t>(in, pos, "row count");
    const auto d = get_le<std::uint32_t>(in, pos, "dimension");
    if (d == 0) throw ParseError("embeddings: zero dimension");

    EmbeddingMatrix e;
    e.dim = d;
    e.data.resize(static_cast<std::size_t>(n) * d);
    for (auto& v : e.data) {
        const auto bits = get_le<std::uint32_t>(in, pos, "matrix payload");
        float f;
        std::memcpy(&f, &bits, 4);
        v = f;
    }
    e.tile_ids.resize(static_cast<std::size_t>(n));
    for (auto& id : e.tile_ids) {
        const auto len = get_le<std::uint32_t>(in, pos, "tile id length");
        if (pos + len > in.size())
            throw ParseError("embeddings: truncated payload reading tile id");
        id.assign(in, pos, len);
        pos += len;
    }
    if (pos != in.size())
        throw ParseError("embeddings: trailing bytes after payload");
    e.validate();
    return e;
}

// ---------------------------------------------------------------------------
// Annotation tables
// ---------------------------------------------------------------------------

std::vector<CellCountRecord> load_cell_counts(const std::string& path) {
    const TsvTable t = read_tsv(path);
    const std::size_t c_tile = t.column_index("tile_id");
    std::array<std::size_t, 4> cols{};
    for (std::size_t i = 0; i < 4; ++i) cols[i] = t.column_index(cell_type_names()[i]);

    std::vector<CellCountRecord> out;
    for (const auto& row : t.rows) {
        CellCountRecord r;
        r.tile_id = row[c_tile];
        long long* fields[4] = {&r.neoplastic, &r.connective, &r.inflammatory, &r.dead};
        for (std::size_t i = 0; i < 4; ++i) {
            *fields[i] = parse_int(row[cols[i]], path);
            if (*fields[i] < 0)
                throw ValidationError(path + ": negative cell count for tile '" + r.tile_id + "'");
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_cell_counts(const std::string& path, const std::vector<CellCountRecord>& rows) {
    TsvTable t;
    t.columns = {"tile_id", "neoplastic", "connective", "inflammatory", "dead"};
    for (const auto& r : rows)
        t.rows.push_back({r.tile_id, std::to_string(r.neoplastic), std::to_string(r.connective),
                          std::to_string(r.inflammatory), std::to_string(r.dead)});
    persist_bytes(path, serialize_tsv(t));
}

void load_signatures(const std::string& path, AnnotationTables& out) {
    const TsvTable t = read_tsv(path);
    const std::size_t c_patient = t.column_index("patient_id");
    out.signature_names.clear();
    std::vector<std::size_t> value_cols;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i == c_patient) continue;
        out.signature_names.push_back(t.columns[i]);
        value_cols.push_back(i);
    }
    out.signatures.clear();
    for (const auto& row : t.rows) {
        std::vector<double> vals;
        vals.reserve(value_cols.size());
        for (const std::size_t c : value_cols) vals.push_back(parse_double(row[c], path));
        if (!out.signatures.emplace(row[c_patient], std::move(vals)).second)
            throw ValidationError(path + ": duplicate patient_id '" + row[c_patient] + "'");
    }
}

void write_signatures(const std::string& path, const AnnotationTables& t) {
    TsvTable out;
    out.columns = {"patient_id"};
    for (const auto& n : t.signature_names) out.columns.push_back(n);
    std::vector<std::string> patients;
    for (const auto& [p, _] : t.signatures) patients.push_back(p);
    std::sort(patients.begin(), patients.end());
    for (const auto& p : patients) {
        std::vector<std::string> row{p};
        for (const double v : t.signatures.at(p)) row.push_back(format_double(v));
        out.rows.push_back(std::move(row));
    }
    persist_bytes(path, serialize_tsv(out));
}

void load_growth_patterns(const std::string& path, AnnotationTables& out) {
    const TsvTable t = read_tsv(path);
    const std::size_t c_tile = t.column_index("tile_id");
    const std::size_t c_pattern = t.column_index("growth_pattern");
    const auto& known = growth_pattern_names();
    out.growth_patterns.clear();
    for (const auto& row : t.rows) {
        const std::string& pattern = row[c_pattern];
        if (std::find(known.begin(), known.end(), pattern) == known.end())
            throw ValidationError(path + ": unknown growth pattern '" + pattern + "'");
        if (!out.growth_patterns.emplace(row[c_tile], pattern).second)
            throw ValidationError(path + ": duplicate tile_id '" + row[c_tile] + "'");
    }
}

void write_growth_patterns(const std::string& path, const AnnotationTables& t) {
    TsvTable out;
    out.columns = {"tile_id", "growth_pattern"};
    std::vector<std::string> tiles;
    for (const auto& [id, _] : t.growth_patterns) tiles.push_back(id);
    std::sort(tiles.begin(), tiles.end());
    for (const auto& id : tiles) out.rows.push_back({id, t.growth_patterns.at(id)});
    persist_bytes(path, serialize_tsv(out));
}

void check_referential_closure(const CohortManifest& manifest,
                               const std::vector<TileRecord>& tiles,
                               const EmbeddingMatrix* embeddings,
                               const AnnotationTables* annotations) {
    std::unordered_map<std::string, const TileRecord*> tile_index;
    for (const auto& t : tiles) {
        if (!manifest.has_slide(t.slide_id))
            throw ValidationError("tile '" + t.tile_id + "' references unknown slide '" +
                                  t.slide_id + "'");
        tile_index.emplace(t.tile_id, &t);
    }
    if (embeddings) {
        for (const auto& id : embeddings->tile_ids)
            if (!tile_index.count(id))
                throw ValidationError("embedding row references unknown tile '" + id + "'");
    }
    if (annotations) {
        for (const auto& r : annotations->cell_counts)
            if (!tile_index.count(r.tile_id))
                throw ValidationError("cell counts reference unknown tile '" + r.tile_id + "'");
        for (const auto& [tile, _] : annotations->growth_patterns)
            if (!tile_index.count(tile))
                throw ValidationError("growth pattern references unknown tile '" + tile + "'");
        std::set<std::string> patients;
        for (const auto& e : manifest.slides) patients.insert(e.patient_id);
        for (const auto& [p, _] : annotations->signatures)
            if (!patients.count(p))
                throw ValidationError("signature row references unknown patient '" + p + "'");
    }
}

// ---------------------------------------------------------------------------
// Bytes + checksum
// ---------------------------------------------------------------------------

namespace {

const std::uint32_t* crc_table() {
    static std::uint32_t table[256];
    static bool init = [] {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        return true;
    }();
    (void)init;
    return table;
}

std::string crc_hex(std::uint32_t crc) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", crc);
    return buf;
}

} // namespace

std::uint32_t crc32(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    const std::uint32_t* table = crc_table();
    std::uint32_t c = 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i)
        c = table[(c ^ p[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

std::string persist_bytes(const std::string& path, const std::string& bytes) {
    const std::string checksum = crc_hex(crc32(bytes.data(), bytes.size()));
    write_file(path, bytes);
    write_file(path + ".crc32", checksum + "\n");
    return checksum;
}

std::string load_bytes(const std::string& path) {
    std::string bytes = read_file(path);
    std::ifstream side(path + ".crc32");
    if (side) {
        std::string expected;
        side >> expected;
        const std::string actual = crc_hex(crc32(bytes.data(), bytes.size()));
        if (expected != actual)
            throw ValidationError("checksum mismatch for '" + path + "': expected " + expected +
                                  ", got " + actual);
    }
    return bytes;
}

} // namespace prl
