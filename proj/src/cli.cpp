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

#include "hipq/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hipq/io.hpp"

namespace hipq {

namespace {

struct TrainArgs {
    std::string features;
    std::string config;
    std::string out;
    std::string metrics;
    std::vector<std::string> sets;
    std::int64_t seed = -1;  // -1: take the config's seed
};

struct EncodeArgs {
    std::string model;
    std::string features;
    std::string out;
};

struct SearchArgs {
    std::string model;
    std::string codes;
    std::string queries;
    int topn = 100;
    std::string out;
};

struct EvalArgs {
    std::string results;
    std::string query_labels;
    std::string db_labels;
    int n = 100;
};

struct ExportArgs {
    std::string model;
    std::string features;
    std::string levels;
    std::string out;
};

int run_train(const TrainArgs& a, std::ostream& out) {
    std::map<std::string, std::string> kv;
    if (!a.config.empty()) {
        kv = parse_config_file(a.config);
    }
    for (const std::string& s : a.sets) {
        std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        }
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    TrainConfig cfg = train_config_from(kv);
    if (a.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(a.seed);
    }

    FeatureMatrix X = read_features(a.features);
    if (X.n == 0) {
        throw io_error(a.features + ": no feature records");
    }
    std::vector<double> data = X.as_double();
    std::vector<EpochMetrics> metrics;
    Model model = train(data.data(), X.n, X.dim, cfg, &metrics);
    model.config_echo = config_echo(cfg);

    save_model(a.out, model);
    std::string metrics_path = a.metrics.empty() ? a.out + ".metrics.csv" : a.metrics;
    write_metrics(metrics_path, metrics);
    out << "trained " << cfg.epochs << " epochs on " << X.n << " items; model -> " << a.out
        << ", metrics -> " << metrics_path << "\n";
    return 0;
}

int run_encode(const EncodeArgs& a, std::ostream& out) {
    Model model = load_model(a.model);
    FeatureMatrix X = read_features(a.features);
    if (X.dim != model.d_in) {
        throw io_error(a.features + ": feature dimension " + std::to_string(X.dim) +
                       " does not match model input dimension " + std::to_string(model.d_in));
    }
    std::vector<double> data = X.as_double();
    EncodedDatabase db = encode_database(model, data.data(), X.n);
    save_codes(a.out, db);
    out << "encoded " << X.n << " items -> " << a.out << "\n";
    return 0;
}

int run_search(const SearchArgs& a, std::ostream& out) {
    Model model = load_model(a.model);
    EncodedDatabase db = load_codes(a.codes);
    if (db.codebook_hash != codebook_hash(model.codebook)) {
        throw io_error(a.codes + ": codebook fingerprint does not match the model (codes were " +
                       "produced by a different model)");
    }
    if (db.M != model.M || db.K != model.K) {
        throw io_error(a.codes + ": code shape does not match the model");
    }
    FeatureMatrix Q = read_features(a.queries);
    if (Q.dim != model.d_in) {
        throw io_error(a.queries + ": query dimension " + std::to_string(Q.dim) +
                       " does not match model input dimension " + std::to_string(model.d_in));
    }
    std::vector<double> q = Q.as_double();
    std::vector<std::vector<SearchResult>> rankings(static_cast<std::size_t>(Q.n));
    std::vector<double> point(static_cast<std::size_t>(model.out_dim()));
    for (int i = 0; i < Q.n; ++i) {
        embed(model, q.data() + static_cast<std::size_t>(i) * Q.dim, nullptr, point.data());
        LookupTable table = build_lookup_table(point.data(), model.codebook);
        rankings[static_cast<std::size_t>(i)] = adc_search(table, db, a.topn);
    }
    write_results(a.out, rankings);
    out << "searched " << Q.n << " queries over " << db.size() << " items -> " << a.out << "\n";
    return 0;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
    std::vector<std::vector<SearchResult>> rankings = read_results(a.results);
    std::vector<std::set<int>> query_labels = read_labels(a.query_labels);
    std::vector<std::set<int>> db_labels = read_labels(a.db_labels);
    if (query_labels.size() != rankings.size()) {
        throw io_error(a.query_labels + ": " + std::to_string(query_labels.size()) +
                       " label lines but " + std::to_string(rankings.size()) +
                       " queries in the results file");
    }
    for (const auto& ranking : rankings) {
        for (const SearchResult& r : ranking) {
            if (r.id >= db_labels.size()) {
                throw io_error(a.db_labels + ": results reference item " + std::to_string(r.id) +
                               " but only " + std::to_string(db_labels.size()) +
                               " label lines are present");
            }
        }
    }
    double map = map_at_n(rankings, query_labels, db_labels, a.n);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", map);
    out << buf << "\n";
    return 0;
}

int run_export(const ExportArgs& a, std::ostream& out) {
    Model model = load_model(a.model);
    FeatureMatrix X = read_features(a.features);
    if (X.dim != model.d_in) {
        throw io_error(a.features + ": feature dimension " + std::to_string(X.dim) +
                       " does not match model input dimension " + std::to_string(model.d_in));
    }
    std::vector<int> targets;
    {
        std::istringstream in(a.levels);
        std::string token;
        while (std::getline(in, token, ',')) {
            try {
                targets.push_back(std::stoi(token));
            } catch (const std::exception&) {
                throw std::invalid_argument("--levels expects a comma-separated integer list");
            }
        }
        if (targets.empty()) {
            throw std::invalid_argument("--levels expects a comma-separated integer list");
        }
    }
    std::vector<double> data = X.as_double();
    std::vector<double> tangents(static_cast<std::size_t>(X.n) * model.out_dim());
    embed_all(model, data.data(), X.n, tangents.data(), nullptr);
    Hierarchy hier =
        build_hierarchy(tangents.data(), X.n, model.out_dim(), targets, model.space(), 0);

    std::ostringstream csv;
    csv << "item_id,level,cluster_id\n";
    for (std::size_t l = 0; l < hier.levels.size(); ++l) {
        const HierarchyLevel& level = hier.levels[l];
        for (int i = 0; i < X.n; ++i) {
            csv << i << ',' << l << ',' << level.assign[static_cast<std::size_t>(i)] << '\n';
        }
    }
    std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw io_error("cannot open file for writing: " + a.out);
    }
    file << csv.str();
    if (!file.good()) {
        throw io_error("write failure on file: " + a.out);
    }
    out << "exported " << hier.levels.size() << " levels for " << X.n << " items -> " << a.out
        << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"hipq: product quantization on hyperbolic space"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train_cmd =
        app.add_subcommand("train", "Train a model and write it with its metrics CSV");
    train_cmd->add_option("--features", train_args.features, "Training features (fvecs)")
        ->required();
    train_cmd->add_option("--config", train_args.config, "key=value config file");
    train_cmd->add_option("--out", train_args.out, "Output model path")->required();
    train_cmd->add_option("--metrics", train_args.metrics,
                          "Metrics CSV path (default: <out>.metrics.csv)");
    train_cmd->add_option("--set", train_args.sets,
                          "Config override key=value (repeatable, wins over --config)");
    train_cmd->add_option("--seed", train_args.seed, "Override the config seed");

    EncodeArgs encode_args;
    CLI::App* encode_cmd = app.add_subcommand("encode", "Encode features into compact codes");
    encode_cmd->add_option("--model", encode_args.model, "Model path")->required();
    encode_cmd->add_option("--features", encode_args.features, "Features to encode (fvecs)")
        ->required();
    encode_cmd->add_option("--out", encode_args.out, "Output code file")->required();

    SearchArgs search_args;
    CLI::App* search_cmd =
        app.add_subcommand("search", "Rank encoded items for each query via table lookups");
    search_cmd->add_option("--model", search_args.model, "Model path")->required();
    search_cmd->add_option("--codes", search_args.codes, "Code file to scan")->required();
    search_cmd->add_option("--queries", search_args.queries, "Query features (fvecs)")->required();
    search_cmd->add_option("--topn", search_args.topn, "Results per query")
        ->required()
        ->check(CLI::PositiveNumber);
    search_cmd
        ->add_option("--out", search_args.out, "Results CSV (query_id,rank,item_id,distance)")
        ->required();

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Mean average precision of a results file");
    eval_cmd->add_option("--results", eval_args.results, "Results CSV from search")->required();
    eval_cmd->add_option("--query-labels", eval_args.query_labels, "Query label lines")
        ->required();
    eval_cmd->add_option("--db-labels", eval_args.db_labels, "Database label lines")->required();
    eval_cmd->add_option("--n", eval_args.n, "Evaluation depth")
        ->required()
        ->check(CLI::PositiveNumber);

    ExportArgs export_args;
    CLI::App* export_cmd = app.add_subcommand(
        "export-hierarchy", "Cluster embedded features and write item/level/cluster rows");
    export_cmd->add_option("--model", export_args.model, "Model path")->required();
    export_cmd->add_option("--features", export_args.features, "Features to cluster (fvecs)")
        ->required();
    export_cmd
        ->add_option("--levels", export_args.levels,
                     "Comma-separated cluster counts, finest first (e.g. \"200,100,50\")")
        ->required();
    export_cmd->add_option("--out", export_args.out, "Output CSV (item_id,level,cluster_id)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (train_cmd->parsed()) {
            return run_train(train_args, out);
        }
        if (encode_cmd->parsed()) {
            return run_encode(encode_args, out);
        }
        if (search_cmd->parsed()) {
            return run_search(search_args, out);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_args, out);
        }
        if (export_cmd->parsed()) {
            return run_export(export_args, out);
        }
        err << "error: no subcommand\n" << app.help();
        return 1;
    } catch (const numerical_error& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int cli_dispatch(int argc, const char* const* argv) {
    return cli_dispatch(argc, argv, std::cout, std::cerr);
}

}  // namespace hipq
