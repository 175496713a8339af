#include "analogwave/kmz_export.hpp"

#include <cmath>
#include <stdexcept>
#include <zlib.h>

#include "analogwave/format.hpp"

namespace analogwave {

namespace {

// 1980-01-01 00:00 in DOS date/time form.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

void put16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put16(out, v & 0xffff);
  put16(out, v >> 16);
}

std::uint32_t get16(const std::vector<std::uint8_t>& in, std::size_t at) {
  if (at + 2 > in.size()) throw std::runtime_error("truncated zip archive");
  return in[at] | (in[at + 1] << 8);
}

std::uint32_t get32(const std::vector<std::uint8_t>& in, std::size_t at) {
  return get16(in, at) | (get16(in, at + 2) << 16);
}

std::string deflate_raw(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::string inflate_raw(const std::uint8_t* data, std::size_t size, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  std::string out(expected, '\0');
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw std::runtime_error("corrupt deflate stream");
  return out;
}

std::string cdata(std::string_view text) {
  std::string out = "<![CDATA[";
  std::size_t start = 0;
  for (auto pos = text.find("]]>"); pos != std::string_view::npos; pos = text.find("]]>", start)) {
    out.append(text.substr(start, pos - start)).append("]]]]><![CDATA[>");
    start = pos + 3;
  }
  out.append(text.substr(start)).append("]]>");
  return out;
}

}  // namespace

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string build_kml(const std::vector<Placemark>& placemarks, std::string_view document_name) {
  std::string kml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<kml xmlns=\"";
  kml.append(kKmlNamespace).append("\">\n<Document>\n<name>");
  kml.append(xml_escape(document_name)).append("</name>\n");
  for (const auto& p : placemarks) {
    if (!std::isfinite(p.latitude) || !std::isfinite(p.longitude) || p.latitude < -90.0 ||
        p.latitude > 90.0 || p.longitude < -180.0 || p.longitude > 180.0) {
      throw std::invalid_argument("placemark '" + p.name + "' has invalid coordinates");
    }
    kml.append("<Placemark>\n<name>").append(xml_escape(p.name)).append("</name>\n");
    kml.append("<description>").append(cdata(p.description)).append("</description>\n");
    kml.append("<Point><coordinates>")
        .append(format_double(p.longitude))
        .append(",")
        .append(format_double(p.latitude))
        .append(",0</coordinates></Point>\n</Placemark>\n");
  }
  kml.append("</Document>\n</kml>\n");
  return kml;
}

std::vector<std::uint8_t> package_kmz(std::string_view kml_text) {
  if (kml_text.empty()) throw std::invalid_argument("empty KML document");
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(kml_text.data()), static_cast<uInt>(kml_text.size())));
  const std::string packed = deflate_raw(kml_text);
  const auto usize = static_cast<std::uint32_t>(kml_text.size());
  const auto csize = static_cast<std::uint32_t>(packed.size());
  const auto name_len = static_cast<std::uint32_t>(kKmzEntryName.size());

  std::vector<std::uint8_t> zip;
  put32(zip, 0x04034b50);
  put16(zip, 20);
  put16(zip, 0);
  put16(zip, 8);
  put16(zip, kDosTime);
  put16(zip, kDosDate);
  put32(zip, crc);
  put32(zip, csize);
  put32(zip, usize);
  put16(zip, name_len);
  put16(zip, 0);
  zip.insert(zip.end(), kKmzEntryName.begin(), kKmzEntryName.end());
  zip.insert(zip.end(), packed.begin(), packed.end());

  const auto cd_offset = static_cast<std::uint32_t>(zip.size());
  put32(zip, 0x02014b50);
  put16(zip, 20);
  put16(zip, 20);
  put16(zip, 0);
  put16(zip, 8);
  put16(zip, kDosTime);
  put16(zip, kDosDate);
  put32(zip, crc);
  put32(zip, csize);
  put32(zip, usize);
  put16(zip, name_len);
  put16(zip, 0);  // extra
  put16(zip, 0);  // comment
  put16(zip, 0);  // disk
  put16(zip, 0);  // internal attrs
  put32(zip, 0);  // external attrs
  put32(zip, 0);  // local header offset
  zip.insert(zip.end(), kKmzEntryName.begin(), kKmzEntryName.end());
  const auto cd_size = static_cast<std::uint32_t>(zip.size()) - cd_offset;

  put32(zip, 0x06054b50);
  put16(zip, 0);
  put16(zip, 0);
  put16(zip, 1);
  put16(zip, 1);
  put32(zip, cd_size);
  put32(zip, cd_offset);
  put16(zip, 0);
  return zip;
}

std::optional<std::string> read_zip_entry(const std::vector<std::uint8_t>& archive,
                                          std::string_view name) {
  if (archive.size() < 22) throw std::runtime_error("not a zip archive");
  std::size_t eocd = archive.size() - 22;
  while (get32(archive, eocd) != 0x06054b50) {
    if (eocd == 0) throw std::runtime_error("zip end record not found");
    --eocd;
  }
  const auto entries = get16(archive, eocd + 10);
  std::size_t at = get32(archive, eocd + 16);
  for (std::uint32_t e = 0; e < entries; ++e) {
    if (get32(archive, at) != 0x02014b50) throw std::runtime_error("bad central directory");
    const auto method = get16(archive, at + 10);
    const auto crc = get32(archive, at + 16);
    const auto csize = get32(archive, at + 20);
    const auto usize = get32(archive, at + 24);
    const auto nlen = get16(archive, at + 28);
    const auto xlen = get16(archive, at + 30);
    const auto clen = get16(archive, at + 32);
    const auto local = get32(archive, at + 42);
    if (at + 46 + nlen > archive.size()) throw std::runtime_error("truncated zip archive");
    const std::string entry_name(archive.begin() + at + 46, archive.begin() + at + 46 + nlen);
    at += 46 + nlen + xlen + clen;
    if (entry_name != name) continue;

    const std::size_t data = local + 30 + get16(archive, local + 26) + get16(archive, local + 28);
    if (data + csize > archive.size()) throw std::runtime_error("truncated zip entry");
    std::string content;
    if (method == 0) {
      content.assign(archive.begin() + data, archive.begin() + data + csize);
    } else if (method == 8) {
      content = inflate_raw(archive.data() + data, csize, usize);
    } else {
      throw std::runtime_error("unsupported zip method " + std::to_string(method));
    }
    const auto actual = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size())));
    if (actual != crc) throw std::runtime_error("zip entry CRC mismatch");
    return content;
  }
  return std::nullopt;
}

}  // namespace analogwave
