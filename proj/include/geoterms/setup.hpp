#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "geoterms/corpus.hpp"
#include "geoterms/geocode.hpp"
#include "geoterms/pipeline.hpp"

namespace geoterms {

// Where the pipeline configuration and reference tables come from.
//
// The config file is the pipeline JSON ({"preset", "overrides"}) optionally
// extended with table paths: "corpus", "zip_table", "gazetteer",
// "geocoder_cache". Relative paths resolve against the config file's
// directory. Explicit options here win over the file.
struct SetupOptions {
  std::optional<std::filesystem::path> config_file;
  std::optional<std::string> preset;
  std::filesystem::path data_dir;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> zip_table;
  std::optional<std::filesystem::path> gazetteer;
  std::optional<std::filesystem::path> geocoder_cache;
  // Consult GEOTERMS_GEOCODER_URL for the external tier.
  bool external_geocoder = true;
};

// Loaded configuration plus the tables it refers to. Not copyable: the
// resolver and Resources point into it.
class Workspace {
 public:
  static std::unique_ptr<Workspace> load(const SetupOptions& options);

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const PipelineConfig& config() const { return config_; }
  const ReferenceCorpus& corpus() const { return corpus_; }
  const ZipTable& zips() const { return zips_; }
  const Resources& resources() const { return resources_; }
  std::string fingerprint() const { return geoterms::fingerprint(config_, resources_); }

 private:
  Workspace() = default;

  PipelineConfig config_;
  ReferenceCorpus corpus_;
  ZipTable zips_;
  Gazetteer gazetteer_;
  std::unique_ptr<CachingGeocoder> external_;
  std::unique_ptr<GeoResolver> resolver_;
  Resources resources_;
};

}  // namespace geoterms
