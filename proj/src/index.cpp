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

#include "hipq/index.hpp"

#include <algorithm>
#include <stdexcept>

#include <zlib.h>

namespace hipq {

namespace {

void append_crc(std::uint32_t& crc, const void* data, std::size_t bytes) {
    crc = static_cast<std::uint32_t>(
        crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(bytes)));
}

// Shared (distance, id) ordering for both search paths.
bool result_less(const SearchResult& a, const SearchResult& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
}

std::vector<SearchResult> top_n(std::vector<SearchResult>& all, int topn) {
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(topn), all.size());
    std::partial_sort(all.begin(), all.begin() + keep, all.end(), result_less);
    all.resize(keep);
    return std::move(all);
}

}  // namespace

std::uint32_t codebook_hash(const Codebook& cb) {
    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
    const std::uint32_t shape[3] = {static_cast<std::uint32_t>(cb.M), static_cast<std::uint32_t>(cb.K),
                                    static_cast<std::uint32_t>(cb.d)};
    append_crc(crc, shape, sizeof shape);
    append_crc(crc, cb.theta.data(), cb.theta.size() * sizeof(double));
    append_crc(crc, cb.words.data(), cb.words.size() * sizeof(double));
    return crc;
}

EncodedDatabase encode_database(const Model& model, const double* X, int n_items) {
    EncodedDatabase db;
    db.M = model.M;
    db.K = model.K;
    db.codebook_hash = codebook_hash(model.codebook);
    db.codes.resize(static_cast<std::size_t>(n_items) * model.M);
    std::vector<double> point(static_cast<std::size_t>(model.out_dim()));
    for (int i = 0; i < n_items; ++i) {
        embed(model, X + static_cast<std::size_t>(i) * model.d_in, nullptr, point.data());
        encode(model.codebook, point.data(), db.codes.data() + static_cast<std::size_t>(i) * model.M);
    }
    return db;
}

LookupTable build_lookup_table(const double* query_point, const Codebook& cb) {
    LookupTable table;
    table.M = cb.M;
    table.K = cb.K;
    table.t.resize(static_cast<std::size_t>(cb.M) * cb.K);
    const int n = cb.ambient();
    for (int m = 0; m < cb.M; ++m) {
        const double* q = query_point + static_cast<std::size_t>(m) * n;
        const double theta = cb.theta[static_cast<std::size_t>(m)];
        for (int k = 0; k < cb.K; ++k)
            table.t[static_cast<std::size_t>(m) * cb.K + k] = geo::distance(q, cb.word(m, k), n, theta);
    }
    return table;
}

std::vector<SearchResult> adc_search(const LookupTable& table, const EncodedDatabase& db,
                                     int topn, ScanStats* stats) {
    if (topn < 1) throw std::invalid_argument("topn must be at least 1");
    if (table.M != db.M || table.K != db.K)
        throw std::invalid_argument("lookup table and database shapes differ");
    const std::size_t n_items = db.size();
    std::vector<SearchResult> all(n_items);
    for (std::size_t i = 0; i < n_items; ++i) {
        const std::uint32_t* code = db.code(i);
        double dist = table.at(0, static_cast<int>(code[0]));
        if (stats) ++stats->lookups;
        for (int m = 1; m < db.M; ++m) {
            dist += table.at(m, static_cast<int>(code[m]));
            if (stats) {
                ++stats->lookups;
                ++stats->adds;
            }
        }
        all[i] = {static_cast<std::uint32_t>(i), dist};
    }
    return top_n(all, topn);
}

std::vector<SearchResult> brute_force_search(const double* query_point, const EncodedDatabase& db,
                                             const Codebook& cb, int topn) {
    if (topn < 1) throw std::invalid_argument("topn must be at least 1");
    const std::size_t n_items = db.size();
    std::vector<SearchResult> all(n_items);
    std::vector<double> decoded(static_cast<std::size_t>(cb.M) * cb.ambient());
    for (std::size_t i = 0; i < n_items; ++i) {
        decode(cb, db.code(i), decoded.data());
        all[i] = {static_cast<std::uint32_t>(i),
                  geo::product_distance(query_point, decoded.data(), cb.space())};
    }
    return top_n(all, topn);
}

double map_at_n(const std::vector<std::vector<SearchResult>>& rankings,
                const std::vector<std::set<int>>& query_labels,
                const std::vector<std::set<int>>& db_labels, int n) {
    if (n < 1) throw std::invalid_argument("MAP cutoff must be at least 1");
    if (rankings.size() != query_labels.size())
        throw std::invalid_argument("one label set per query required");
    if (rankings.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        const auto& labels = query_labels[q];
        int relevant = 0;
        double ap = 0.0;
        const std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(n), rankings[q].size());
        for (std::size_t k = 0; k < depth; ++k) {
            const auto& item_labels = db_labels.at(rankings[q][k].id);
            const bool rel = std::any_of(item_labels.begin(), item_labels.end(),
                                         [&labels](int l) { return labels.count(l) > 0; });
            if (rel) {
                ++relevant;
                ap += static_cast<double>(relevant) / static_cast<double>(k + 1);
            }
        }
        if (relevant > 0) total += ap / static_cast<double>(relevant);
    }
    return total / static_cast<double>(rankings.size());
}

}  // namespace hipq
