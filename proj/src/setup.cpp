#include "geoterms/setup.hpp"

#include "geoterms/error.hpp"
#include "geoterms/hash.hpp"

namespace geoterms {

namespace fs = std::filesystem;

std::unique_ptr<Workspace> Workspace::load(const SetupOptions& options) {
  std::unique_ptr<Workspace> ws(new Workspace());

  nlohmann::json file_json = nlohmann::json::object();
  fs::path base = options.data_dir;
  fs::path config_dir = fs::current_path();
  if (options.config_file) {
    auto parsed = nlohmann::json::parse(read_file(*options.config_file), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw ConfigError(options.config_file->string() + ": config must be a JSON object");
    }
    file_json = parsed;
    config_dir = options.config_file->parent_path();
  }

  auto path_from_file = [&](const char* key) -> std::optional<fs::path> {
    if (!file_json.contains(key)) return std::nullopt;
    if (!file_json[key].is_string()) throw ConfigError(std::string(key) + " must be a path string");
    fs::path p = file_json[key].get<std::string>();
    file_json.erase(key);
    return p.is_absolute() ? p : config_dir / p;
  };
  auto corpus_path = path_from_file("corpus");
  auto zip_path = path_from_file("zip_table");
  auto gazetteer_path = path_from_file("gazetteer");
  auto cache_path = path_from_file("geocoder_cache");

  if (options.preset) {
    if (options.config_file) throw ConfigError("give either a preset or a config file, not both");
    file_json["preset"] = *options.preset;
  }
  ws->config_ = PipelineConfig::from_json(file_json);

  if (options.corpus) corpus_path = options.corpus;
  if (options.zip_table) zip_path = options.zip_table;
  if (options.gazetteer) gazetteer_path = options.gazetteer;
  if (options.geocoder_cache) cache_path = options.geocoder_cache;
  if (!corpus_path) corpus_path = base / "corpus" / (std::string(to_string(ws->config_.corpus_profile)) + ".tsv");
  if (!zip_path) zip_path = base / "geo" / "zcta.csv";
  if (!gazetteer_path) gazetteer_path = base / "geo" / "gazetteer.tsv";

  ws->corpus_ = ReferenceCorpus::load(*corpus_path);
  ws->zips_ = ZipTable::load(*zip_path);
  ws->gazetteer_ = Gazetteer::load(*gazetteer_path);

  std::unique_ptr<GeocoderClient> client;
  if (options.external_geocoder) client = HttpGeocoderClient::from_environment();
  if (client || cache_path) {
    ws->external_ = std::make_unique<CachingGeocoder>(std::move(client), cache_path.value_or(fs::path()));
  }
  ws->resolver_ = std::make_unique<GeoResolver>(&ws->zips_, &ws->gazetteer_, ws->external_.get());

  ws->resources_.corpus = &ws->corpus_;
  ws->resources_.geo = ws->resolver_.get();
  ws->resources_.geo_tables_hash = ws->zips_.content_hash() + ":" + ws->gazetteer_.content_hash();
  return ws;
}

}  // namespace geoterms
