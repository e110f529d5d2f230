// Copyright 2026-present the hipq project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Database encoding, asymmetric search through query-specific lookup
// tables, the brute-force oracle it must match exactly, and MAP evaluation.

#include <cstdint>
#include <set>
#include <vector>

#include "hipq/model.hpp"

namespace hipq {

// Hard codes for N items: M indices each, row-major. Item ids are row
// positions. The hash ties the codes to the codebook that produced them.
struct EncodedDatabase {
    int M = 0;
    int K = 0;
    std::uint32_t codebook_hash = 0;
    std::vector<std::uint32_t> codes;  // N*M

    std::size_t size() const { return M == 0 ? 0 : codes.size() / static_cast<std::size_t>(M); }
    const std::uint32_t* code(std::size_t item) const { return codes.data() + item * static_cast<std::size_t>(M); }
};

// Query-specific table of geodesic distances to every codeword:
// at(m, k) = distance(query subspace m, codeword (m, k)).
struct LookupTable {
    int M = 0;
    int K = 0;
    std::vector<double> t;  // M*K

    double at(int m, int k) const { return t[static_cast<std::size_t>(m) * K + k]; }
};

struct SearchResult {
    std::uint32_t id = 0;
    double distance = 0.0;
};

// Scan cost counters, incremented as the work happens (test probes assert
// the M lookups + M-1 adds per item contract).
struct ScanStats {
    std::uint64_t lookups = 0;
    std::uint64_t adds = 0;
};

// CRC32 fingerprint of a codebook's geometry (shape, curvatures, words);
// stored in code files so stale codes cannot be searched with a different
// model.
std::uint32_t codebook_hash(const Codebook& cb);

// Embed (no augmentation) and hard-encode every feature row.
EncodedDatabase encode_database(const Model& model, const double* X, int n_items);

LookupTable build_lookup_table(const double* query_point, const Codebook& cb);

// Ascending by (distance, id); returns min(topn, N) rows. The distance of
// item x is sum_m table(m, code_x[m]), accumulated in subspace order — the
// bit-identical twin of product_distance over decoded points.
std::vector<SearchResult> adc_search(const LookupTable& table, const EncodedDatabase& db,
                                     int topn, ScanStats* stats = nullptr);

// Decodes every item and measures product_distance directly; same tie rule.
std::vector<SearchResult> brute_force_search(const double* query_point, const EncodedDatabase& db,
                                             const Codebook& cb, int topn);

// Mean average precision at n: AP = sum of precision@k over relevant ranks
// k <= n, divided by the number of relevant results in the top n (0 when
// none). Relevance is a shared label.
double map_at_n(const std::vector<std::vector<SearchResult>>& rankings,
                const std::vector<std::set<int>>& query_labels,
                const std::vector<std::set<int>>& db_labels, int n);

}  // namespace hipq
