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

// File formats: fvecs-style feature matrices, label lists, CRC-protected
// model files, bit-packed code files, CSV results/metrics, and the flat
// key=value training config.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hipq/index.hpp"
#include "hipq/trainer.hpp"

namespace hipq {

// Row-major feature matrix; each file record is a little-endian i32 dim
// followed by that many little-endian f32 values. All records must agree
// on dim.
struct FeatureMatrix {
    int n = 0;
    int dim = 0;
    std::vector<float> values;  // n * dim

    const float* row(int i) const { return values.data() + static_cast<std::size_t>(i) * dim; }
    std::vector<double> as_double() const { return {values.begin(), values.end()}; }
};

FeatureMatrix read_features(const std::string& path);
void write_features(const std::string& path, const FeatureMatrix& X);

// One line per item: comma-separated nonnegative integers; a blank line is
// an unlabeled item.
std::vector<std::set<int>> read_labels(const std::string& path);

// Model files carry a "HIPQ" magic, a format version, every parameter, a
// config echo, and a trailing CRC32 of all preceding bytes.
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// Code files carry a "HIPC" magic, the shape, the codebook fingerprint, and
// N items of ceil(M*log2(K)/8) bytes, indices packed LSB-first.
void save_codes(const std::string& path, const EncodedDatabase& db);
EncodedDatabase load_codes(const std::string& path);

// Search results CSV: query_id,rank,item_id,distance (rank is 1-based).
void write_results(const std::string& path, const std::vector<std::vector<SearchResult>>& rankings);
std::vector<std::vector<SearchResult>> read_results(const std::string& path);

// Metrics CSV: epoch,loss_aug,loss_prot,loss_ins,loss_total,mean_quant_error,lr.
void write_metrics(const std::string& path, const std::vector<EpochMetrics>& metrics);

// key=value per line; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Typed view of a parsed config. Unknown keys are errors (they are almost
// always typos). `config_echo` renders the canonical key=value form that
// model files embed.
TrainConfig train_config_from(const std::map<std::string, std::string>& kv);
std::string config_echo(const TrainConfig& cfg);

}  // namespace hipq
