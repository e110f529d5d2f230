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

#include "hipq/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hipq/geometry.hpp"

namespace hipq {

namespace {

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open file for reading: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw io_error("read failure on file: " + path);
    }
    return ss.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open file for writing: " + path);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out.good()) {
        throw io_error("write failure on file: " + path);
    }
}

// Append/consume little-endian scalars. The build targets little-endian
// hosts, so raw memcpy matches the on-disk layout.
class ByteWriter {
 public:
    template <class T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const char* p = reinterpret_cast<const char*>(&v);
        buf_.append(p, sizeof(T));
    }

    template <class T>
    void put_array(const T* v, std::size_t count) {
        static_assert(std::is_trivially_copyable_v<T>);
        buf_.append(reinterpret_cast<const char*>(v), count * sizeof(T));
    }

    void put_bytes(const std::string& s) { buf_.append(s); }

    const std::string& bytes() const { return buf_; }

 private:
    std::string buf_;
};

class ByteReader {
 public:
    ByteReader(const std::string& bytes, std::string origin)
        : bytes_(bytes), origin_(std::move(origin)) {}

    template <class T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        require(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    template <class T>
    void get_array(T* out, std::size_t count) {
        static_assert(std::is_trivially_copyable_v<T>);
        require(count * sizeof(T));
        std::memcpy(out, bytes_.data() + pos_, count * sizeof(T));
        pos_ += count * sizeof(T);
    }

    std::string get_bytes(std::size_t count) {
        require(count);
        std::string s = bytes_.substr(pos_, count);
        pos_ += count;
        return s;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void expect_end() const {
        if (pos_ != bytes_.size()) {
            throw io_error(origin_ + ": " + std::to_string(bytes_.size() - pos_) +
                           " unexpected trailing bytes at offset " + std::to_string(pos_));
        }
    }

 private:
    void require(std::size_t count) const {
        if (pos_ + count > bytes_.size()) {
            throw io_error(origin_ + ": truncated at byte offset " + std::to_string(pos_) +
                           " (need " + std::to_string(count) + " more bytes, have " +
                           std::to_string(bytes_.size() - pos_) + ")");
        }
    }

    const std::string& bytes_;
    std::string origin_;
    std::size_t pos_ = 0;
};

uint32_t crc_of(const std::string& bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(bytes.size()));
    return static_cast<uint32_t>(crc);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool is_power_of_two(int v) {
    return v > 0 && (v & (v - 1)) == 0;
}

int int_log2(int v) {
    int bits = 0;
    while ((1 << bits) < v) {
        ++bits;
    }
    return bits;
}

constexpr uint16_t kModelVersion = 1;
constexpr uint16_t kCodesVersion = 1;

}  // namespace

FeatureMatrix read_features(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    ByteReader r(bytes, path);
    FeatureMatrix X;
    int record = 0;
    while (r.remaining() > 0) {
        std::size_t at = r.pos();
        int32_t dim = r.get<int32_t>();
        if (dim <= 0) {
            throw io_error(path + ": record " + std::to_string(record) +
                           " has invalid dimension " + std::to_string(dim) +
                           " at byte offset " + std::to_string(at));
        }
        if (record == 0) {
            X.dim = dim;
        } else if (dim != X.dim) {
            throw io_error(path + ": record " + std::to_string(record) + " has dimension " +
                           std::to_string(dim) + " but record 0 has dimension " +
                           std::to_string(X.dim) + " (byte offset " + std::to_string(at) + ")");
        }
        std::size_t old = X.values.size();
        X.values.resize(old + static_cast<std::size_t>(dim));
        try {
            r.get_array(X.values.data() + old, static_cast<std::size_t>(dim));
        } catch (const io_error& e) {
            throw io_error(std::string(e.what()) + " while reading record " +
                           std::to_string(record));
        }
        ++record;
    }
    X.n = record;
    return X;
}

void write_features(const std::string& path, const FeatureMatrix& X) {
    if (X.n > 0 && X.dim <= 0) {
        throw std::invalid_argument("write_features: dim must be positive");
    }
    if (X.values.size() != static_cast<std::size_t>(X.n) * static_cast<std::size_t>(X.dim)) {
        throw std::invalid_argument("write_features: value count does not match n*dim");
    }
    ByteWriter w;
    for (int i = 0; i < X.n; ++i) {
        w.put<int32_t>(X.dim);
        w.put_array(X.row(i), static_cast<std::size_t>(X.dim));
    }
    write_file_bytes(path, w.bytes());
}

std::vector<std::set<int>> read_labels(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    std::vector<std::set<int>> labels;
    std::istringstream in(bytes);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::set<int> row;
        std::string trimmed = trim(line);
        if (!trimmed.empty()) {
            std::istringstream ls(trimmed);
            std::string token;
            while (std::getline(ls, token, ',')) {
                std::string t = trim(token);
                if (t.empty()) {
                    throw io_error(path + ": line " + std::to_string(line_no) +
                                   ": empty label token");
                }
                std::size_t used = 0;
                int value = 0;
                try {
                    value = std::stoi(t, &used);
                } catch (const std::exception&) {
                    throw io_error(path + ": line " + std::to_string(line_no) +
                                   ": not an integer label: '" + t + "'");
                }
                if (used != t.size()) {
                    throw io_error(path + ": line " + std::to_string(line_no) +
                                   ": not an integer label: '" + t + "'");
                }
                row.insert(value);
            }
        }
        labels.push_back(std::move(row));
    }
    return labels;
}

void save_model(const std::string& path, const Model& model) {
    ByteWriter w;
    w.put_bytes("HIPQ");
    w.put<uint16_t>(kModelVersion);
    w.put<uint32_t>(static_cast<uint32_t>(model.d_in));
    w.put<uint32_t>(static_cast<uint32_t>(model.M));
    w.put<uint32_t>(static_cast<uint32_t>(model.K));
    w.put<uint32_t>(static_cast<uint32_t>(model.d));
    w.put<double>(model.codebook.tau);
    w.put<double>(model.tau_qc);
    w.put<uint8_t>(model.learn_curvature ? 1 : 0);
    w.put_array(model.codebook.theta.data(), model.codebook.theta.size());
    w.put_array(model.proj_w.data(), model.proj_w.size());
    w.put_array(model.proj_b.data(), model.proj_b.size());
    w.put_array(model.codebook.words.data(), model.codebook.words.size());
    w.put<uint32_t>(static_cast<uint32_t>(model.config_echo.size()));
    w.put_bytes(model.config_echo);
    uint32_t crc = crc_of(w.bytes());
    w.put<uint32_t>(crc);
    write_file_bytes(path, w.bytes());
}

Model load_model(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    if (bytes.size() < 4 + sizeof(uint32_t)) {
        throw io_error(path + ": too small to be a model file");
    }
    std::string payload = bytes.substr(0, bytes.size() - sizeof(uint32_t));
    uint32_t stored_crc = 0;
    std::memcpy(&stored_crc, bytes.data() + payload.size(), sizeof(uint32_t));
    if (crc_of(payload) != stored_crc) {
        throw io_error(path + ": checksum mismatch, file is corrupted");
    }

    ByteReader r(payload, path);
    if (r.get_bytes(4) != "HIPQ") {
        throw io_error(path + ": not a model file (bad magic)");
    }
    uint16_t version = r.get<uint16_t>();
    if (version != kModelVersion) {
        throw io_error(path + ": unsupported model format version " + std::to_string(version));
    }

    Model model;
    model.d_in = static_cast<int>(r.get<uint32_t>());
    model.M = static_cast<int>(r.get<uint32_t>());
    model.K = static_cast<int>(r.get<uint32_t>());
    model.d = static_cast<int>(r.get<uint32_t>());
    if (model.d_in < 1 || model.M < 1 || model.d < 2) {
        throw io_error(path + ": invalid model shape");
    }
    if (!is_power_of_two(model.K)) {
        throw io_error(path + ": codebook size " + std::to_string(model.K) +
                       " is not a power of two");
    }
    model.codebook.tau = r.get<double>();
    model.tau = model.codebook.tau;
    model.tau_qc = r.get<double>();
    model.learn_curvature = r.get<uint8_t>() != 0;
    if (model.codebook.tau <= 0.0 || model.tau_qc <= 0.0) {
        throw io_error(path + ": temperatures must be positive");
    }

    model.codebook.M = model.M;
    model.codebook.K = model.K;
    model.codebook.d = model.d;
    model.codebook.theta.resize(static_cast<std::size_t>(model.M));
    r.get_array(model.codebook.theta.data(), model.codebook.theta.size());
    model.rho.resize(static_cast<std::size_t>(model.M));
    for (int m = 0; m < model.M; ++m) {
        double theta = model.codebook.theta[static_cast<std::size_t>(m)];
        if (!(theta > 0.0) || !std::isfinite(theta)) {
            throw io_error(path + ": curvature " + std::to_string(m) + " is not positive");
        }
        model.rho[static_cast<std::size_t>(m)] = std::log(theta);
    }

    model.proj_w.resize(static_cast<std::size_t>(model.out_dim()) *
                        static_cast<std::size_t>(model.d_in));
    r.get_array(model.proj_w.data(), model.proj_w.size());
    model.proj_b.resize(static_cast<std::size_t>(model.out_dim()));
    r.get_array(model.proj_b.data(), model.proj_b.size());

    model.codebook.words.resize(static_cast<std::size_t>(model.M) * model.K * (model.d + 1));
    r.get_array(model.codebook.words.data(), model.codebook.words.size());

    uint32_t echo_len = r.get<uint32_t>();
    model.config_echo = r.get_bytes(echo_len);
    r.expect_end();

    for (int m = 0; m < model.M; ++m) {
        double theta = model.codebook.theta[static_cast<std::size_t>(m)];
        for (int k = 0; k < model.K; ++k) {
            const double* word = model.codebook.word(m, k);
            if (word[0] <= 0.0) {
                throw io_error(path + ": codeword (" + std::to_string(m) + "," +
                               std::to_string(k) + ") has non-positive time coordinate");
            }
            double defect = geo::manifold_defect(word, model.d + 1, theta);
            if (!(defect * theta <= 1e-8)) {
                throw io_error(path + ": codeword (" + std::to_string(m) + "," +
                               std::to_string(k) + ") is off the manifold (defect " +
                               format_double(defect) + ")");
            }
        }
    }
    return model;
}

void save_codes(const std::string& path, const EncodedDatabase& db) {
    if (!is_power_of_two(db.K)) {
        throw std::invalid_argument("save_codes: K must be a power of two");
    }
    int bits_per_code = int_log2(db.K);
    std::size_t bytes_per_item =
        (static_cast<std::size_t>(db.M) * bits_per_code + 7) / 8;

    ByteWriter w;
    w.put_bytes("HIPC");
    w.put<uint16_t>(kCodesVersion);
    w.put<uint64_t>(static_cast<uint64_t>(db.size()));
    w.put<uint32_t>(static_cast<uint32_t>(db.M));
    w.put<uint32_t>(static_cast<uint32_t>(db.K));
    w.put<uint32_t>(db.codebook_hash);
    std::vector<uint8_t> packed(bytes_per_item);
    for (std::size_t i = 0; i < db.size(); ++i) {
        std::fill(packed.begin(), packed.end(), 0);
        const uint32_t* code = db.code(static_cast<int>(i));
        int bit_pos = 0;
        for (int m = 0; m < db.M; ++m) {
            uint32_t v = code[m];
            if (v >= static_cast<uint32_t>(db.K)) {
                throw std::invalid_argument(
                    "save_codes: code value " + std::to_string(v) + " out of range for K=" +
                    std::to_string(db.K) + " (item " + std::to_string(i) + ", subspace " +
                    std::to_string(m) + ")");
            }
            for (int b = 0; b < bits_per_code; ++b) {
                if ((v >> b) & 1u) {
                    packed[static_cast<std::size_t>(bit_pos) / 8] |=
                        static_cast<uint8_t>(1u << (bit_pos % 8));
                }
                ++bit_pos;
            }
        }
        w.put_array(packed.data(), packed.size());
    }
    write_file_bytes(path, w.bytes());
}

EncodedDatabase load_codes(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    ByteReader r(bytes, path);
    if (r.get_bytes(4) != "HIPC") {
        throw io_error(path + ": not a code file (bad magic)");
    }
    uint16_t version = r.get<uint16_t>();
    if (version != kCodesVersion) {
        throw io_error(path + ": unsupported code format version " + std::to_string(version));
    }
    uint64_t n = r.get<uint64_t>();
    EncodedDatabase db;
    db.M = static_cast<int>(r.get<uint32_t>());
    db.K = static_cast<int>(r.get<uint32_t>());
    db.codebook_hash = r.get<uint32_t>();
    if (db.M < 1 || !is_power_of_two(db.K)) {
        throw io_error(path + ": invalid code shape");
    }
    int bits_per_code = int_log2(db.K);
    std::size_t bytes_per_item =
        (static_cast<std::size_t>(db.M) * bits_per_code + 7) / 8;
    db.codes.resize(static_cast<std::size_t>(n) * db.M);
    std::vector<uint8_t> packed(bytes_per_item);
    for (uint64_t i = 0; i < n; ++i) {
        r.get_array(packed.data(), packed.size());
        int bit_pos = 0;
        for (int m = 0; m < db.M; ++m) {
            uint32_t v = 0;
            for (int b = 0; b < bits_per_code; ++b) {
                if ((packed[static_cast<std::size_t>(bit_pos) / 8] >> (bit_pos % 8)) & 1u) {
                    v |= 1u << b;
                }
                ++bit_pos;
            }
            if (v >= static_cast<uint32_t>(db.K)) {
                throw io_error(path + ": item " + std::to_string(i) + " subspace " +
                               std::to_string(m) + " has out-of-range code " + std::to_string(v));
            }
            db.codes[static_cast<std::size_t>(i) * db.M + m] = v;
        }
    }
    r.expect_end();
    return db;
}

void write_results(const std::string& path, const std::vector<std::vector<SearchResult>>& rankings) {
    std::ostringstream out;
    out << "query_id,rank,item_id,distance\n";
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        for (std::size_t rank = 0; rank < rankings[q].size(); ++rank) {
            const SearchResult& res = rankings[q][rank];
            out << q << ',' << (rank + 1) << ',' << res.id << ','
                << format_double(res.distance) << '\n';
        }
    }
    write_file_bytes(path, out.str());
}

std::vector<std::vector<SearchResult>> read_results(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    std::istringstream in(bytes);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "query_id,rank,item_id,distance") {
        throw io_error(path + ": missing results header");
    }
    std::vector<std::vector<SearchResult>> rankings;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        std::istringstream ls(trimmed);
        std::string qs, rs, ids, ds;
        if (!std::getline(ls, qs, ',') || !std::getline(ls, rs, ',') ||
            !std::getline(ls, ids, ',') || !std::getline(ls, ds, ',')) {
            throw io_error(path + ": line " + std::to_string(line_no) + ": expected 4 fields");
        }
        try {
            std::size_t q = static_cast<std::size_t>(std::stoul(qs));
            std::size_t rank = static_cast<std::size_t>(std::stoul(rs));
            SearchResult res;
            res.id = static_cast<uint32_t>(std::stoul(ids));
            res.distance = std::stod(ds);
            if (q > rankings.size()) {
                throw io_error(path + ": line " + std::to_string(line_no) +
                               ": query ids must be contiguous and ascending");
            }
            if (q == rankings.size()) {
                rankings.emplace_back();
            }
            if (q != rankings.size() - 1 || rank != rankings[q].size() + 1) {
                throw io_error(path + ": line " + std::to_string(line_no) +
                               ": ranks must be 1-based and consecutive per query");
            }
            rankings[q].push_back(res);
        } catch (const io_error&) {
            throw;
        } catch (const std::exception&) {
            throw io_error(path + ": line " + std::to_string(line_no) + ": malformed row");
        }
    }
    return rankings;
}

void write_metrics(const std::string& path, const std::vector<EpochMetrics>& metrics) {
    std::ostringstream out;
    out << "epoch,loss_aug,loss_prot,loss_ins,loss_total,mean_quant_error,lr\n";
    for (const EpochMetrics& m : metrics) {
        out << m.epoch << ',' << format_double(m.loss_aug) << ',' << format_double(m.loss_prot)
            << ',' << format_double(m.loss_ins) << ',' << format_double(m.loss_total) << ','
            << format_double(m.mean_quant_error) << ',' << format_double(m.lr) << '\n';
    }
    write_file_bytes(path, out.str());
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw io_error("config line " + std::to_string(line_no) +
                           ": expected key=value, got '" + trimmed + "'");
        }
        std::string key = trim(trimmed.substr(0, eq));
        std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty()) {
            throw io_error("config line " + std::to_string(line_no) + ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    try {
        return parse_config_text(read_file_bytes(path));
    } catch (const io_error& e) {
        std::string msg = e.what();
        if (msg.rfind("config line", 0) == 0) {
            throw io_error(path + ": " + msg);
        }
        throw;
    }
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(value, &used);
    } catch (const std::exception&) {
        throw io_error("config key '" + key + "': not an integer: '" + value + "'");
    }
    if (used != value.size()) {
        throw io_error("config key '" + key + "': not an integer: '" + value + "'");
    }
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw io_error("config key '" + key + "': not a number: '" + value + "'");
    }
    if (used != value.size()) {
        throw io_error("config key '" + key + "': not a number: '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") {
        return true;
    }
    if (value == "0" || value == "false") {
        return false;
    }
    throw io_error("config key '" + key + "': expected 0/1/true/false, got '" + value + "'");
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw io_error("config key '" + key + "': not an unsigned integer: '" + value + "'");
    }
    if (used != value.size()) {
        throw io_error("config key '" + key + "': not an unsigned integer: '" + value + "'");
    }
    return static_cast<uint64_t>(v);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::istringstream in(value);
    std::string token;
    while (std::getline(in, token, ',')) {
        std::string t = trim(token);
        if (t.empty()) {
            throw io_error("config key '" + key + "': empty list entry in '" + value + "'");
        }
        out.push_back(parse_int(key, t));
    }
    if (out.empty()) {
        throw io_error("config key '" + key + "': empty list");
    }
    return out;
}

}  // namespace

TrainConfig train_config_from(const std::map<std::string, std::string>& kv) {
    TrainConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "batch_size") {
            cfg.batch_size = parse_int(key, value);
        } else if (key == "epochs") {
            cfg.epochs = parse_int(key, value);
        } else if (key == "lr_start") {
            cfg.lr_start = parse_double(key, value);
        } else if (key == "lr_end") {
            cfg.lr_end = parse_double(key, value);
        } else if (key == "lambda1") {
            cfg.lambda1 = parse_double(key, value);
        } else if (key == "lambda2") {
            cfg.lambda2 = parse_double(key, value);
        } else if (key == "tau") {
            cfg.tau = parse_double(key, value);
        } else if (key == "tau_qc") {
            cfg.tau_qc = parse_double(key, value);
        } else if (key == "M") {
            cfg.M = parse_int(key, value);
        } else if (key == "K") {
            cfg.K = parse_int(key, value);
        } else if (key == "d") {
            cfg.d = parse_int(key, value);
        } else if (key == "theta_init") {
            cfg.theta_init = parse_double(key, value);
        } else if (key == "learn_curvature") {
            cfg.learn_curvature = parse_bool(key, value);
        } else if (key == "hier_levels") {
            cfg.hier_levels = parse_int_list(key, value);
        } else if (key == "noise_std") {
            cfg.noise_std = parse_double(key, value);
        } else if (key == "mask_prob") {
            cfg.mask_prob = parse_double(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else {
            throw io_error("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

std::string config_echo(const TrainConfig& cfg) {
    std::ostringstream out;
    out << "batch_size=" << cfg.batch_size << '\n';
    out << "epochs=" << cfg.epochs << '\n';
    out << "lr_start=" << format_double(cfg.lr_start) << '\n';
    out << "lr_end=" << format_double(cfg.lr_end) << '\n';
    out << "lambda1=" << format_double(cfg.lambda1) << '\n';
    out << "lambda2=" << format_double(cfg.lambda2) << '\n';
    out << "tau=" << format_double(cfg.tau) << '\n';
    out << "tau_qc=" << format_double(cfg.tau_qc) << '\n';
    out << "M=" << cfg.M << '\n';
    out << "K=" << cfg.K << '\n';
    out << "d=" << cfg.d << '\n';
    out << "theta_init=" << format_double(cfg.theta_init) << '\n';
    out << "learn_curvature=" << (cfg.learn_curvature ? 1 : 0) << '\n';
    out << "hier_levels=";
    for (std::size_t i = 0; i < cfg.hier_levels.size(); ++i) {
        out << (i ? "," : "") << cfg.hier_levels[i];
    }
    out << '\n';
    out << "noise_std=" << format_double(cfg.noise_std) << '\n';
    out << "mask_prob=" << format_double(cfg.mask_prob) << '\n';
    out << "seed=" << cfg.seed << '\n';
    return out.str();
}

}  // namespace hipq
