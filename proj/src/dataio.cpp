/* Copyright (c) 2026 Aircast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "aircast/dataio.hpp"

#include <unistd.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aircast {

static_assert(std::endian::native == std::endian::little,
              "gridpack writer assumes a little-endian host");

namespace {

constexpr const char* kLayout = "time-major, then row-major lat x lon, then channel-last";

std::int64_t record_bytes(const GridSpec& g, int channels) {
  return g.cells() * channels * static_cast<std::int64_t>(sizeof(float));
}

void write_records_f32(const fs::path& file, const std::vector<Tensor>& records) {
  std::ofstream out(file, std::ios::binary);
  AIRCAST_CHECK(out.good(), IntegrityError, "cannot open for writing: " + file.string());
  std::vector<float> buf;
  for (const auto& rec : records) {
    buf.resize(static_cast<std::size_t>(rec.size()));
    const double* src = rec.data();
    for (std::int64_t i = 0; i < rec.size(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>(src[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  out.close();
  AIRCAST_CHECK(out.good(), IntegrityError, "short write: " + file.string());
}

json catalog_to_json(const VariableCatalog& cat) {
  return json{{"pollutant_vars", cat.pollutant_vars},
              {"met_vars", cat.met_vars},
              {"static_vars", cat.static_vars},
              {"pressure_levels", cat.pressure_levels},
              {"greyline_vars", cat.greyline_vars}};
}

VariableCatalog catalog_from_json(const json& j) {
  VariableCatalog cat;
  cat.pollutant_vars = j.at("pollutant_vars").get<std::vector<std::string>>();
  cat.met_vars = j.at("met_vars").get<std::vector<std::string>>();
  cat.static_vars = j.at("static_vars").get<std::vector<std::string>>();
  cat.pressure_levels = j.at("pressure_levels").get<std::vector<int>>();
  cat.greyline_vars = j.at("greyline_vars").get<std::vector<std::string>>();
  cat.validate();
  return cat;
}

void check_file_size(const fs::path& file, std::int64_t expected) {
  AIRCAST_CHECK(fs::exists(file), IntegrityError, "missing array file: " + file.string());
  const auto actual = static_cast<std::int64_t>(fs::file_size(file));
  AIRCAST_CHECK(actual == expected, IntegrityError,
                "array file " + file.string() + " has " + std::to_string(actual) +
                    " bytes, expected " + std::to_string(expected));
}

}  // namespace

void GridPackManifest::validate() const {
  AIRCAST_CHECK(!times.empty(), FormatError, "gridpack has an empty time list");
  for (std::size_t i = 1; i < times.size(); ++i) {
    AIRCAST_CHECK(times[i] - times[i - 1] == kStepSeconds, FormatError,
                  "timestamps must be spaced exactly 12 hours apart");
  }
  catalog.validate();
}

GridPack write_pack(const PackData& data, const std::string& path) {
  GridPackManifest manifest{data.grid, data.catalog, data.times};
  manifest.validate();

  const int C = data.catalog.n_pollutants();
  const int D = data.catalog.n_met();
  const int S = data.catalog.n_static();
  const std::size_t n = data.times.size();
  AIRCAST_CHECK(data.pollutants.size() == n && data.meteorology.size() == n, ShapeError,
                "one pollutant and one meteorology record required per time");

  auto check_record = [&](const Tensor& t, int k, const char* what) {
    AIRCAST_CHECK(t.ndim() == 3 && t.dim(0) == data.grid.n_lat && t.dim(1) == data.grid.n_lon &&
                      t.dim(2) == k,
                  ShapeError, std::string("bad record shape for ") + what);
    AIRCAST_CHECK(all_finite(t), IntegrityError, std::string("non-finite values in ") + what);
  };
  for (const auto& t : data.pollutants) {
    check_record(t, C, "pollutants");
    for (std::int64_t i = 0; i < t.size(); ++i)
      AIRCAST_CHECK(t[i] >= 0.0, IntegrityError, "negative pollutant concentration");
  }
  for (const auto& t : data.meteorology) check_record(t, D, "meteorology");
  check_record(data.statics, S, "statics");

  const fs::path target(path);
  AIRCAST_CHECK(!fs::exists(target), ArgumentError, "output path already exists: " + path);
  fs::create_directories(target.parent_path().empty() ? "." : target.parent_path());
  const fs::path tmp = target.string() + ".tmp-" + std::to_string(::getpid());
  fs::create_directories(tmp);

  std::vector<std::string> iso_times;
  iso_times.reserve(n);
  for (UtcTime t : data.times) iso_times.push_back(utc_to_iso(t));

  json j{{"format", "gridpack"},
         {"version", 1},
         {"grid", {{"n_lat", data.grid.n_lat}, {"n_lon", data.grid.n_lon},
                   {"resolution_deg", data.grid.resolution_deg}}},
         {"catalog", catalog_to_json(data.catalog)},
         {"times", iso_times},
         {"dtype", "float32"},
         {"byte_order", "little-endian"},
         {"layout", kLayout},
         {"arrays",
          {{"pollutants", {{"file", "pollutants.f32"}, {"channels", C}, {"n_records", n}}},
           {"meteorology", {{"file", "meteorology.f32"}, {"channels", D}, {"n_records", n}}},
           {"statics", {{"file", "statics.f32"}, {"channels", S}, {"n_records", 1}}}}}};

  {
    std::ofstream mf(tmp / "manifest.json");
    mf << j.dump(2) << "\n";
    AIRCAST_CHECK(mf.good(), IntegrityError, "failed writing manifest.json");
  }
  write_records_f32(tmp / "pollutants.f32", data.pollutants);
  write_records_f32(tmp / "meteorology.f32", data.meteorology);
  write_records_f32(tmp / "statics.f32", {data.statics});

  fs::rename(tmp, target);
  return GridPack::open(path);
}

GridPack GridPack::open(const std::string& path) {
  const fs::path dir(path);
  const fs::path mf = dir / "manifest.json";
  AIRCAST_CHECK(fs::exists(mf), FormatError, "no manifest.json under " + path);

  json j;
  {
    std::ifstream in(mf);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw FormatError("manifest.json is not valid JSON: " + std::string(e.what()));
    }
  }
  AIRCAST_CHECK(j.value("format", "") == "gridpack", FormatError, "not a gridpack manifest");
  AIRCAST_CHECK(j.value("version", 0) == 1, FormatError, "unsupported gridpack version");
  AIRCAST_CHECK(j.value("dtype", "") == "float32" && j.value("byte_order", "") == "little-endian",
                FormatError, "unsupported array encoding");

  GridPack pack;
  pack.path_ = path;
  const auto& jg = j.at("grid");
  pack.manifest_.grid = GridSpec(jg.at("n_lat").get<int>(), jg.at("n_lon").get<int>());
  pack.manifest_.catalog = catalog_from_json(j.at("catalog"));
  for (const auto& s : j.at("times")) pack.manifest_.times.push_back(iso_to_utc(s.get<std::string>()));
  pack.manifest_.validate();

  const auto& cat = pack.manifest_.catalog;
  const auto& grid = pack.manifest_.grid;
  const std::int64_t n = pack.manifest_.n_times();
  check_file_size(dir / "pollutants.f32", n * record_bytes(grid, cat.n_pollutants()));
  check_file_size(dir / "meteorology.f32", n * record_bytes(grid, cat.n_met()));
  check_file_size(dir / "statics.f32", record_bytes(grid, cat.n_static()));

  pack.statics_ = pack.read_record("statics.f32", 0, cat.n_static(), cat.static_vars,
                                   pack.manifest_.times.front());
  return pack;
}

FieldTensor GridPack::read_record(const std::string& file, int record, int channels,
                                  const std::vector<std::string>& names, UtcTime valid_time) const {
  const fs::path p = fs::path(path_) / file;
  const std::int64_t bytes = record_bytes(manifest_.grid, channels);
  std::ifstream in(p, std::ios::binary);
  AIRCAST_CHECK(in.good(), IntegrityError, "cannot open array file: " + p.string());
  in.seekg(static_cast<std::streamoff>(record) * bytes);

  std::vector<float> buf(static_cast<std::size_t>(manifest_.grid.cells()) * channels);
  in.read(reinterpret_cast<char*>(buf.data()), bytes);
  AIRCAST_CHECK(in.gcount() == bytes, IntegrityError,
                "truncated read from " + p.string() + ": got " + std::to_string(in.gcount()) +
                    " of " + std::to_string(bytes) + " bytes");

  FieldTensor out(manifest_.grid, names, valid_time);
  double* dst = out.values.data();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    AIRCAST_CHECK(std::isfinite(buf[i]), IntegrityError, "non-finite value in " + p.string());
    dst[i] = static_cast<double>(buf[i]);
  }
  return out;
}

FieldTensor GridPack::pollutants_at(int t) const {
  AIRCAST_CHECK(t >= 0 && t < n_times(), RangeError, "time index out of range");
  return read_record("pollutants.f32", t, manifest_.catalog.n_pollutants(),
                     manifest_.catalog.pollutant_vars, manifest_.times[static_cast<std::size_t>(t)]);
}

FieldTensor GridPack::meteorology_at(int t) const {
  AIRCAST_CHECK(t >= 0 && t < n_times(), RangeError, "time index out of range");
  return read_record("meteorology.f32", t, manifest_.catalog.n_met(), manifest_.catalog.met_vars,
                     manifest_.times[static_cast<std::size_t>(t)]);
}

TrainingWindow GridPack::slice_window(int t) const {
  AIRCAST_CHECK(t >= 1 && t <= n_times() - 2, RangeError,
                "window index " + std::to_string(t) + " needs one step of history and one of "
                "future within [1, " + std::to_string(n_times() - 2) + "]");
  TrainingWindow w;
  w.p_prev = pollutants_at(t - 1);
  w.p_init = pollutants_at(t);
  w.q_init = meteorology_at(t);
  w.q_next = meteorology_at(t + 1);
  w.p_target = pollutants_at(t + 1);
  return w;
}

}  // namespace aircast
