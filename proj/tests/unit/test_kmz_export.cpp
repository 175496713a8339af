#include "doctest.h"

#include <cmath>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "analogwave/kmz_export.hpp"

using namespace analogwave;
namespace pt = boost::property_tree;

namespace {

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

const std::vector<Placemark> kSample{
    {"Annaba", 36.83, 7.82, "<b>heat</b> recall 36.4%"},
    {"Madrid & <Retiro>", 40.41, -3.70, "keys: 1:heat:2:3:1:30"},
};

}  // namespace

TEST_CASE("kml carries lon,lat,0 coordinates and the 2.2 namespace") {
  const auto kml = build_kml(kSample);
  CHECK(kml.find("<coordinates>7.82,36.83,0</coordinates>") != std::string::npos);
  CHECK(kml.find("<coordinates>-3.7,40.41,0</coordinates>") != std::string::npos);
  auto tree = parse_xml(kml);
  CHECK(tree.get<std::string>("kml.<xmlattr>.xmlns") == "http://www.opengis.net/kml/2.2");
  std::vector<std::string> names;
  for (const auto& [tag, node] : tree.get_child("kml.Document")) {
    if (tag == "Placemark") names.push_back(node.get<std::string>("name"));
  }
  CHECK(names == std::vector<std::string>{"Annaba", "Madrid & <Retiro>"});
}

TEST_CASE("descriptions survive as text, including a CDATA terminator") {
  const std::string tricky = "a]]>b <i>x</i> & 'q'";
  auto tree = parse_xml(build_kml({{"p", 0.0, 0.0, tricky}}));
  CHECK(tree.get<std::string>("kml.Document.Placemark.description") == tricky);
  CHECK(xml_escape("<a href=\"x\">&'</a>") == "&lt;a href=&quot;x&quot;&gt;&amp;&apos;&lt;/a&gt;");
}

TEST_CASE("bad coordinates name the placemark") {
  try {
    build_kml({{"Nowhere", 91.0, 0.0, ""}});
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("Nowhere") != std::string::npos);
  }
  CHECK_THROWS_AS(build_kml({{"x", 0.0, 180.5, ""}}), std::invalid_argument);
  CHECK_THROWS_AS(build_kml({{"x", std::nan(""), 0.0, ""}}), std::invalid_argument);
  CHECK_NOTHROW(build_kml({{"edge", -90.0, -180.0, ""}}));
}

TEST_CASE("kmz is a single-entry zip that round trips") {
  const auto kml = build_kml(kSample);
  const auto kmz = package_kmz(kml);
  REQUIRE(kmz.size() > 30);
  CHECK(kmz[0] == 'P');
  CHECK(kmz[1] == 'K');
  CHECK(kmz[2] == 3);
  CHECK(kmz[3] == 4);
  CHECK(read_zip_entry(kmz, "doc.kml") == kml);
  CHECK_FALSE(read_zip_entry(kmz, "other.kml").has_value());
  CHECK(package_kmz(kml) == kmz);  // fixed timestamps
  CHECK_THROWS(package_kmz(""));
}

TEST_CASE("corrupted archives are rejected") {
  const auto kml = build_kml(kSample);
  auto kmz = package_kmz(kml);
  // flip a byte of the stored CRC in the central directory
  std::size_t cd = 0;
  for (std::size_t k = 0; k + 4 <= kmz.size(); ++k) {
    if (kmz[k] == 0x50 && kmz[k + 1] == 0x4b && kmz[k + 2] == 1 && kmz[k + 3] == 2) cd = k;
  }
  REQUIRE(cd > 0);
  kmz[cd + 16] ^= 0xff;
  CHECK_THROWS(read_zip_entry(kmz, "doc.kml"));
  CHECK_THROWS(read_zip_entry(std::vector<std::uint8_t>(10, 0), "doc.kml"));
}
