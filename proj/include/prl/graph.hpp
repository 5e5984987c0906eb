#pragma once

#include "prl/ingest.hpp"
#include "prl/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace prl {

enum class Metric { euclidean, cosine };

Metric parse_metric(const std::string& s);

// Union-symmetrized K-nearest-neighbor graph, CSR adjacency, unit edge
// weights. No self loops.
struct NeighborGraph {
    std::vector<std::string> node_ids;
    std::vector<std::uint64_t> offsets;   // size n+1
    std::vector<std::uint32_t> neighbors; // sorted within each node
    std::vector<double> degrees;          // unit weights -> neighbor counts
    double total_edge_weight = 0.0;       // m, each undirected edge counted once

    std::size_t num_nodes() const { return degrees.size(); }
    std::span<const std::uint32_t> neighbors_of(std::size_t v) const {
        return {neighbors.data() + offsets[v], neighbors.data() + offsets[v + 1]};
    }
};

// Exact brute-force search; each node linked to its K nearest others, ties
// broken by smaller index, then symmetrized by union.
NeighborGraph build_knn_graph(const EmbeddingMatrix& e, int k, Metric metric = Metric::euclidean);

// Uniform subsample without replacement, seed-deterministic, original row
// order preserved.
EmbeddingMatrix subsample_vectors(const EmbeddingMatrix& e, std::size_t n, std::uint64_t seed);

struct Partition {
    std::vector<std::int32_t> labels;  // dense 0..C-1 per node
    std::int32_t num_clusters = 0;
    std::vector<std::size_t> cluster_sizes;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> artifact_flags;  // per cluster

    void recompute_sizes();
};

// Quality of a partition: sum over communities of
// intra-edge fraction minus gamma * (degree fraction)^2.
double modularity(const NeighborGraph& g, const std::vector<std::int32_t>& labels, double gamma);

struct LeidenOptions {
    double gamma = 1.0;
    std::uint64_t seed = 0;
    int max_iters = 50;
};

struct LeidenResult {
    Partition partition;
    std::vector<double> modularity_trace;  // after each outer iteration
};

// Community detection: local moving to a local maximum, randomized
// refinement within communities, aggregation; iterated to a fixed point.
// Every returned community is internally connected and the modularity trace
// is non-decreasing.
LeidenResult leiden(const NeighborGraph& g, const LeidenOptions& opts = {});

// Cluster flagged as background/artifact when the mean tissue fraction of
// its tiles falls below the threshold, or when listed manually.
struct ArtifactRule {
    double min_mean_tissue_fraction = 0.3;
    std::vector<std::int32_t> manual_clusters;
};

struct TwoPassResult {
    EmbeddingMatrix clean;              // rows surviving the artifact pass
    std::vector<std::size_t> kept_rows; // indices into the input matrix
    Partition partition;                // second-pass clustering of `clean`
    Partition first_pass;               // with artifact_flags set
};

TwoPassResult two_pass_cluster(const EmbeddingMatrix& e, int k, double gamma,
                               const ArtifactRule& rule,
                               std::span<const float> tissue_fractions,  // empty -> all 1.0
                               std::uint64_t seed);

// Frozen training subsample + labels used to label held-out tiles.
struct ClusterModel {
    EmbeddingMatrix train;
    std::vector<std::int32_t> labels;
    std::int32_t num_clusters = 0;
    int k_assign = 250;
    Metric metric = Metric::euclidean;

    void validate() const;
};

// Majority cluster among the K_assign nearest training vectors; ties broken
// by the smallest cluster id.
std::vector<std::int32_t> assign_clusters(const ClusterModel& model, const EmbeddingMatrix& e);

struct PurityRow {
    std::int32_t cluster = 0;
    std::string dominant_label;
    double purity = 0.0;
    std::size_t size = 0;
};

std::vector<PurityRow> cluster_purity(const Partition& p,
                                      const std::vector<std::string>& tile_labels);

// Partition TSV (tile_id, cluster) and cluster-model binary ("PRLM").
void write_partition(const std::string& path, const std::vector<std::string>& node_ids,
                     const Partition& p);
std::vector<std::pair<std::string, std::int32_t>> load_partition(const std::string& path);

void write_cluster_model(const std::string& path, const ClusterModel& m);
ClusterModel load_cluster_model(const std::string& path);

} // namespace prl
