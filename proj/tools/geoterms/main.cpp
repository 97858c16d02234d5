// geoterms command line: ingest, append, shard, merge, serve, cloud-svg,
// synth, bench.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "geoterms/dataset.hpp"
#include "geoterms/error.hpp"
#include "geoterms/layout.hpp"
#include "geoterms/pipeline.hpp"
#include "geoterms/server.hpp"
#include "geoterms/setup.hpp"
#include "geoterms/store.hpp"
#include "geoterms/synth.hpp"

#ifndef GEOTERMS_DEFAULT_DATA_DIR
#define GEOTERMS_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace geoterms;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;

struct SetupFlags {
  std::string config;
  std::string preset;
  std::string data_dir = GEOTERMS_DEFAULT_DATA_DIR;
  std::string corpus;
  std::string zip_table;
  std::string gazetteer;
  std::string geocoder_cache;
  bool offline = false;

  void attach(CLI::App* cmd) {
    auto* c = cmd->add_option("--config", config, "pipeline config JSON");
    cmd->add_option("--preset", preset, "nsf, twitter or custom")->excludes(c);
    cmd->add_option("--data-dir", data_dir, "directory holding corpus/ and geo/ tables");
    cmd->add_option("--corpus", corpus, "reference corpus TSV");
    cmd->add_option("--zip-table", zip_table, "zip centroid CSV");
    cmd->add_option("--gazetteer", gazetteer, "place name TSV");
    cmd->add_option("--geocoder-cache", geocoder_cache, "external geocoder cache TSV");
    cmd->add_flag("--offline", offline, "never call the external geocoder");
  }

  std::unique_ptr<Workspace> load() const {
    SetupOptions o;
    if (!config.empty()) o.config_file = config;
    if (!preset.empty()) o.preset = preset;
    o.data_dir = data_dir;
    if (!corpus.empty()) o.corpus = corpus;
    if (!zip_table.empty()) o.zip_table = zip_table;
    if (!gazetteer.empty()) o.gazetteer = gazetteer;
    if (!geocoder_cache.empty()) o.geocoder_cache = geocoder_cache;
    o.external_geocoder = !offline;
    return Workspace::load(o);
  }
};

RecordBatch read_inputs(const std::vector<std::string>& paths) {
  RecordBatch all;
  for (const auto& p : paths) {
    RecordBatch b = read_records(p);
    all.malformed += b.malformed;
    for (auto& r : b.records) all.records.push_back(std::move(r));
  }
  return all;
}

void print_summary(const Dataset& ds) {
  const auto& m = ds.manifest;
  std::cout << "accepted\t" << m.report.accepted << '\n';
  for (std::size_t i = 0; i < kSkipReasonCount; ++i) {
    std::cout << "skipped." << to_string(static_cast<SkipReason>(i)) << '\t' << m.report.skipped[i] << '\n';
  }
  std::cout << "bins\t" << m.bins.size() << '\n'
            << "sites\t" << m.site_count << '\n'
            << "triples\t" << m.triple_count << '\n'
            << "fingerprint\t" << m.fingerprint << '\n';
}

// "i/k" with 0 <= i < k.
std::pair<std::size_t, std::size_t> parse_part(const std::string& text) {
  auto slash = text.find('/');
  std::size_t i = 0, k = 0;
  try {
    if (slash == std::string::npos) throw std::invalid_argument(text);
    i = std::stoul(text.substr(0, slash));
    k = std::stoul(text.substr(slash + 1));
  } catch (const std::exception&) {
    throw ConfigError("--part must look like i/k");
  }
  if (k == 0 || i >= k) throw ConfigError("--part i/k needs 0 <= i < k");
  return {i, k};
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("not an integer list: " + text);
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

int run_serve(const std::string& dataset_dir, ServerOptions options) {
  // Signals are taken synchronously by one thread so SIGHUP can reload safely.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGHUP);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Api api(std::make_shared<const Store>(Store::open(dataset_dir)));
  HttpServer server(api, options);
  int port = server.bind();
  if (port < 0) throw IoError("cannot bind " + options.host + ":" + std::to_string(options.port));
  std::cout << "listening\t" << port << '\n'
            << "fingerprint\t" << api.snapshot()->manifest().fingerprint << std::endl;

  std::thread waiter([&] {
    for (;;) {
      int sig = 0;
      if (sigwait(&signals, &sig) != 0) continue;
      if (sig == SIGHUP) {
        try {
          api.swap(std::make_shared<const Store>(Store::open(dataset_dir)));
          spdlog::info("reloaded {} ({})", dataset_dir, api.snapshot()->manifest().fingerprint);
        } catch (const std::exception& e) {
          spdlog::error("reload failed, keeping previous dataset: {}", e.what());
        }
      } else {
        server.stop();
        return;
      }
    }
  });
  server.serve();
  // Wakes the signal waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

std::pair<std::string, std::string> split_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) return {text, text};
  return {text.substr(0, dots), text.substr(dots + 2)};
}

int run_cloud_svg(const std::string& dataset_dir, double lat, double lon, const std::string& bins,
                  const std::string& out_dir, std::size_t max_tags, double radius, bool sparks) {
  Store store = Store::open(dataset_dir);
  const auto& manifest = store.manifest();
  SiteKey site = SiteKey::from_degrees(lat, lon);

  std::vector<TimeBin> frames;
  if (bins.empty()) {
    frames = manifest.bins;
  } else {
    auto [a, b] = split_range(bins);
    TimeBin first = TimeBin::parse(a, manifest.granularity);
    TimeBin last = TimeBin::parse(b, manifest.granularity);
    if (last < first) throw ConfigError("--bins range is reversed");
    for (TimeBin t = first; t <= last; t = t.next()) frames.push_back(t);
  }

  fs::create_directories(out_dir);
  std::optional<CloudLayout> prev;
  for (const TimeBin& bin : frames) {
    std::vector<Tag> tags;
    for (const auto& tw : store.query_cloud(site, bin, max_tags)) tags.push_back({tw.phrase, tw.weight});
    CloudLayout layout = layout_cloud(tags, radius, prev ? &*prev : nullptr);
    std::map<std::string, std::vector<double>> lines;
    if (sparks) {
      for (const auto& tb : layout.placed) {
        auto& series = lines[tb.phrase];
        for (const auto& p : store.query_spark(site, tb.phrase)) series.push_back(p.value);
      }
    }
    fs::path file = fs::path(out_dir) / (bin.label() + ".svg");
    std::ofstream out(file, std::ios::binary);
    out << render_svg(layout, sparks ? &lines : nullptr);
    if (!out) throw IoError("cannot write " + file.string());
    std::cout << file.string() << '\t' << layout.placed.size() << '\n';
    prev = std::move(layout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geotagged text keyphrase mining and tag cloud service"};
  app.require_subcommand(1);
  int workers = 1;

  SetupFlags ingest_setup;
  std::vector<std::string> ingest_inputs;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "build a dataset from records");
  ingest->add_option("--input", ingest_inputs, "JSON lines or CSV record files")->required();
  ingest->add_option("--out", ingest_out, "dataset directory")->required();
  ingest->add_option("--workers", workers, "map-phase threads")->check(CLI::PositiveNumber);
  ingest_setup.attach(ingest);

  SetupFlags append_setup;
  std::vector<std::string> append_inputs;
  std::string append_dataset;
  auto* append_cmd = app.add_subcommand("append", "fold new records into an existing dataset");
  append_cmd->add_option("--dataset", append_dataset, "dataset directory")->required();
  append_cmd->add_option("--input", append_inputs, "record files")->required();
  append_cmd->add_option("--workers", workers, "map-phase threads")->check(CLI::PositiveNumber);
  append_setup.attach(append_cmd);

  SetupFlags shard_setup;
  std::vector<std::string> shard_inputs;
  std::string shard_out, shard_part = "0/1";
  auto* shard = app.add_subcommand("shard", "map one slice of the input into a contribution file");
  shard->add_option("--input", shard_inputs, "record files")->required();
  shard->add_option("--part", shard_part, "slice i/k: records with index % k == i");
  shard->add_option("--out", shard_out, "shard file")->required();
  shard->add_option("--workers", workers, "map-phase threads")->check(CLI::PositiveNumber);
  shard_setup.attach(shard);

  std::vector<std::string> merge_inputs;
  std::string merge_out;
  auto* merge = app.add_subcommand("merge", "reduce shard files into a dataset");
  merge->add_option("shards", merge_inputs, "shard files")->required();
  merge->add_option("--out", merge_out, "dataset directory")->required();

  std::string serve_dataset;
  ServerOptions serve_options;
  auto* serve = app.add_subcommand("serve", "HTTP query service (SIGHUP reloads the dataset)");
  serve->add_option("--dataset", serve_dataset, "dataset directory")->required();
  serve->add_option("--port", serve_options.port, "0 picks a free port");
  serve->add_option("--host", serve_options.host);
  serve->add_option("--cors-origin", serve_options.cors_origin);

  std::string svg_dataset, svg_bins, svg_out;
  double svg_lat = 0, svg_lon = 0, svg_radius = 150;
  std::size_t svg_tags = 20;
  bool svg_sparks = false;
  auto* svg = app.add_subcommand("cloud-svg", "render per-bin tag cloud frames for one site");
  svg->add_option("--dataset", svg_dataset)->required();
  svg->add_option("lat", svg_lat)->required();
  svg->add_option("lon", svg_lon)->required();
  svg->add_option("--bins", svg_bins, "first..last bin labels (default: all)");
  svg->add_option("--out", svg_out, "output directory")->required();
  svg->add_option("--max-tags", svg_tags);
  svg->add_option("--radius", svg_radius);
  svg->add_flag("--sparklines", svg_sparks);

  SetupFlags synth_setup;
  SynthOptions synth_options;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write synthetic records as JSON lines");
  synth->add_option("--docs", synth_options.documents);
  synth->add_option("--seed", synth_options.seed);
  synth->add_option("--mean-chars", synth_options.mean_chars);
  synth->add_option("--out", synth_out)->required();
  synth_setup.attach(synth);

  SetupFlags bench_setup;
  std::string bench_docs = "1000,10000", bench_workers = "1,2,4", bench_ngrams = "2,4";
  std::uint64_t bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "time ingest; CSV of docs,workers,ngram,seconds");
  bench->add_option("--docs", bench_docs);
  bench->add_option("--workers", bench_workers);
  bench->add_option("--ngram", bench_ngrams);
  bench->add_option("--seed", bench_seed);
  bench_setup.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*ingest) {
      auto ws = ingest_setup.load();
      Dataset ds = run(read_inputs(ingest_inputs), workers, ws->resources(), ws->config());
      write_dataset(ds, ingest_out);
      print_summary(ds);
    } else if (*append_cmd) {
      auto ws = append_setup.load();
      Dataset ds = append(read_dataset(append_dataset), read_inputs(append_inputs), workers,
                          ws->resources(), ws->config());
      write_dataset(ds, append_dataset);
      print_summary(ds);
    } else if (*shard) {
      auto ws = shard_setup.load();
      auto [part, parts] = parse_part(shard_part);
      RecordBatch input = read_inputs(shard_inputs);
      std::vector<Record> mine;
      for (std::size_t i = part; i < input.records.size(); i += parts) mine.push_back(input.records[i]);
      ShardFile file;
      file.fingerprint = ws->fingerprint();
      file.granularity = ws->config().granularity;
      file.config = ws->config().to_json();
      file.partial = map_records(mine, workers, ws->resources(), ws->config());
      // Part 0 carries the malformed count.
      if (part == 0) file.partial.report().skip(SkipReason::kMalformed, input.malformed);
      std::ofstream out(shard_out, std::ios::binary);
      write_shard(file, out);
      if (!out) throw IoError("cannot write " + shard_out);
      std::cout << "records\t" << mine.size() << '\n' << "fingerprint\t" << file.fingerprint << '\n';
    } else if (*merge) {
      std::vector<ShardFile> shards;
      for (const auto& p : merge_inputs) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot open " + p);
        shards.push_back(read_shard(in, p));
      }
      Dataset ds = merge_shards(shards);
      write_dataset(ds, merge_out);
      print_summary(ds);
    } else if (*serve) {
      return run_serve(serve_dataset, serve_options);
    } else if (*svg) {
      return run_cloud_svg(svg_dataset, svg_lat, svg_lon, svg_bins, svg_out, svg_tags, svg_radius, svg_sparks);
    } else if (*synth) {
      auto ws = synth_setup.load();
      std::ofstream out(synth_out, std::ios::binary);
      for (const Record& r : synthesize(ws->corpus(), synth_options)) {
        nlohmann::ordered_json j;
        j["text"] = r.text;
        j["geo"] = r.geo;
        j["t0"] = format_timestamp(r.range.begin);
        if (r.range.end != r.range.begin) j["t1"] = format_timestamp(r.range.end);
        j["value"] = r.value;
        out << j.dump() << '\n';
      }
      if (!out) throw IoError("cannot write " + synth_out);
    } else if (*bench) {
      auto ws = bench_setup.load();
      std::cout << "docs,workers,ngram,seconds\n";
      for (int docs : parse_int_list(bench_docs)) {
        SynthOptions so;
        so.documents = static_cast<std::size_t>(docs);
        so.seed = bench_seed;
        RecordBatch input{synthesize(ws->corpus(), so), 0};
        for (int n : parse_int_list(bench_ngrams)) {
          PipelineConfig config = ws->config();
          config.params.max_ngram = n;
          config.validate();
          for (int w : parse_int_list(bench_workers)) {
            if (w < 1) throw ConfigError("workers must be positive");
            auto t0 = std::chrono::steady_clock::now();
            Dataset ds = run(input, w, ws->resources(), config);
            std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            std::printf("%d,%d,%d,%.4f\n", docs, w, n, dt.count());
            std::fflush(stdout);
          }
        }
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
