#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace prl {

// ---------------------------------------------------------------------------
// Cohort tables
// ---------------------------------------------------------------------------

struct SlideEntry {
    std::string slide_id;
    std::string patient_id;
    std::string institution_id;
    std::string label;  // empty when the manifest has no label column
};

struct CohortManifest {
    std::string cohort_id;
    std::vector<SlideEntry> slides;
    std::vector<std::string> label_set;  // closed set, sorted

    std::unordered_map<std::string, std::size_t> slide_index;

    const SlideEntry& slide(const std::string& slide_id) const;
    bool has_slide(const std::string& slide_id) const {
        return slide_index.count(slide_id) != 0;
    }
    std::vector<std::string> patient_ids() const;      // unique, sorted
    std::vector<std::string> institution_ids() const;  // unique, sorted

    void rebuild_index();
    void validate(const std::vector<std::string>& expected_labels = {}) const;
};

enum class SurvivalEndpoint { overall_survival, recurrence_free };

const char* endpoint_name(SurvivalEndpoint e);
SurvivalEndpoint parse_endpoint(const std::string& s);

struct SurvivalRecord {
    std::string patient_id;
    double time_months = 0.0;
    int event = 0;  // 1 = death/recurrence observed, 0 = censored
    SurvivalEndpoint endpoint = SurvivalEndpoint::overall_survival;
};

struct SurvivalTable {
    std::vector<SurvivalRecord> rows;

    const SurvivalRecord* find(const std::string& patient_id, SurvivalEndpoint e) const;
    std::size_t event_count(SurvivalEndpoint e) const;
};

struct TileRecord {
    std::string tile_id;
    std::string slide_id;
    int row = 0;
    int col = 0;
    double tissue_fraction = 1.0;
    std::string path;  // optional
};

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

// Dense row-major float matrix of tile representations with aligned ids.
struct EmbeddingMatrix {
    std::vector<std::string> tile_ids;
    std::vector<float> data;  // rows() x dim, row-major
    std::size_t dim = 0;

    std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
    const float* row(std::size_t i) const { return data.data() + i * dim; }
    float* row(std::size_t i) { return data.data() + i * dim; }
    void validate() const;  // shape alignment + finiteness
};

// ---------------------------------------------------------------------------
// External annotations
// ---------------------------------------------------------------------------

struct CellCountRecord {
    std::string tile_id;
    long long neoplastic = 0;
    long long connective = 0;
    long long inflammatory = 0;
    long long dead = 0;
};

inline const std::vector<std::string>& cell_type_names() {
    static const std::vector<std::string> names{"neoplastic", "connective", "inflammatory", "dead"};
    return names;
}

inline const std::vector<std::string>& growth_pattern_names() {
    static const std::vector<std::string> names{"solid", "acinar", "papillary", "micropapillary", "lepidic"};
    return names;
}

struct AnnotationTables {
    std::vector<CellCountRecord> cell_counts;                       // per tile
    std::vector<std::string> signature_names;                      // column order
    std::unordered_map<std::string, std::vector<double>> signatures;  // patient -> values
    std::unordered_map<std::string, std::string> growth_patterns;  // tile -> pattern
};

// ---------------------------------------------------------------------------
// Loaders (TSV with mandatory header; extra columns ignored)
// ---------------------------------------------------------------------------

CohortManifest load_manifest(const std::string& path,
                             const std::vector<std::string>& expected_labels = {});
void write_manifest(const std::string& path, const CohortManifest& m);

SurvivalTable load_survival(const std::string& path);
void write_survival(const std::string& path, const SurvivalTable& t);

std::vector<TileRecord> load_tile_records(const std::string& path);
void write_tile_records(const std::string& path, const std::vector<TileRecord>& tiles);

EmbeddingMatrix load_embeddings(const std::string& path);
void write_embeddings(const std::string& path, const EmbeddingMatrix& e);

std::vector<CellCountRecord> load_cell_counts(const std::string& path);
void write_cell_counts(const std::string& path, const std::vector<CellCountRecord>& rows);

void load_signatures(const std::string& path, AnnotationTables& out);
void write_signatures(const std::string& path, const AnnotationTables& t);

void load_growth_patterns(const std::string& path, AnnotationTables& out);
void write_growth_patterns(const std::string& path, const AnnotationTables& t);

// Every tile maps to exactly one known slide; annotations reference known
// tiles/patients. Throws ValidationError on any gap.
void check_referential_closure(const CohortManifest& manifest,
                               const std::vector<TileRecord>& tiles,
                               const EmbeddingMatrix* embeddings = nullptr,
                               const AnnotationTables* annotations = nullptr);

// ---------------------------------------------------------------------------
// Artifact persistence (deterministic bytes + CRC32 sidecar)
// ---------------------------------------------------------------------------

std::uint32_t crc32(const void* data, std::size_t len);

// Writes `bytes` to `path` and `<path>.crc32` next to it; returns the
// checksum as 8 hex digits.
std::string persist_bytes(const std::string& path, const std::string& bytes);

// Reads the file; when a sidecar exists the payload is verified against it
// (mismatch -> ValidationError).
std::string load_bytes(const std::string& path);

std::string read_file(const std::string& path);   // no checksum verification
void write_file(const std::string& path, const std::string& bytes);

} // namespace prl
