#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace analogwave {

inline constexpr std::string_view kKmlNamespace = "http://www.opengis.net/kml/2.2";
inline constexpr std::string_view kKmzEntryName = "doc.kml";

struct Placemark {
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string description;  // HTML, embedded as CDATA
};

/// Escapes &, <, >, " and ' for XML/HTML text.
std::string xml_escape(std::string_view text);

/// KML 2.2 document with one Point placemark per input, in input order.
/// Throws std::invalid_argument naming the placemark on bad coordinates.
std::string build_kml(const std::vector<Placemark>& placemarks,
                      std::string_view document_name = "Heat/cold wave forecasts");

/// Single-entry ZIP (`doc.kml`, deflate) with fixed timestamps.
std::vector<std::uint8_t> package_kmz(std::string_view kml_text);

/// Reads one stored or deflated entry from a ZIP archive; nullopt if absent.
std::optional<std::string> read_zip_entry(const std::vector<std::uint8_t>& archive,
                                          std::string_view name);

}  // namespace analogwave
