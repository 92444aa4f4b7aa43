#include "terrafuse/collection.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"

namespace terrafuse {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Sensor s) { return s == Sensor::Optical ? "optical" : "sar"; }

Sensor parse_sensor(std::string_view s) {
  if (s == "optical") return Sensor::Optical;
  if (s == "sar") return Sensor::Sar;
  throw Error(ErrorKind::Parse, "unknown sensor '" + std::string(s) + "'");
}

ImageCollection::ImageCollection(std::vector<CollectionItem> items) : items_(std::move(items)) {
  std::stable_sort(items_.begin(), items_.end(),
                   [](const auto& a, const auto& b) { return a.date < b.date; });
  for (const auto& item : items_)
    if (!item.stack.same_geometry(items_.front().stack))
      throw Error(ErrorKind::DimensionMismatch, "collection items must share one grid");
}

void write_collection(const ImageCollection& c, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  json items = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& item = c.items()[i];
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu_%s", std::string(to_string(item.sensor)).c_str(),
                  i, item.date.iso().c_str());
    write_stack(item.stack, dir / name);
    items.push_back({{"date", item.date.iso()},
                     {"sensor", to_string(item.sensor)},
                     {"cloud_fraction", item.cloud_fraction},
                     {"path", name}});
  }
  write_text(dir / "collection.json", json{{"items", items}}.dump(2) + "\n");
}

ImageCollection read_collection(const fs::path& dir) {
  json index;
  try {
    index = json::parse(read_text(dir / "collection.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "malformed collection index in " + dir.string() + ": " + e.what());
  }
  std::vector<CollectionItem> items;
  try {
    for (const auto& j : index.at("items")) {
      items.push_back(CollectionItem{Date::parse(j.at("date").get<std::string>()),
                                     parse_sensor(j.at("sensor").get<std::string>()),
                                     read_stack(dir / j.at("path").get<std::string>()),
                                     j.at("cloud_fraction").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "bad collection entry in " + dir.string() + ": " + e.what());
  }
  return ImageCollection(std::move(items));
}

}  // namespace terrafuse
