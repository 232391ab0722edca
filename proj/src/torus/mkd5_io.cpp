#include "mkd5/mkd5_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mkd5 {
namespace {

constexpr char kMagic[8] = {'M', 'K', 'D', '5', 0, 0, 0, 1};

uint8_t rank_tag(rank_t r) {
  switch (r) {
    case rank_t::scalar:
      return 0;
    case rank_t::vector:
      return 1;
    case rank_t::tensor:
      return 2;
    case rank_t::sym_tensor:
      return 3;
    case rank_t::skew_tensor:
      return 4;
  }
  return 0;
}

rank_t rank_from_tag(uint8_t t, const std::string& path) {
  if (t > 4)
    throw io_error(path + ": bad rank tag " + std::to_string(t) +
                   " at offset 17");
  return static_cast<rank_t>(t);
}

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path, long offset) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw io_error(path + ": truncated header at offset " +
                   std::to_string(offset));
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_field(const std::string& path, const field_dump& f,
                 const std::string& sidecar_json) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error(path + ": cannot open for writing");
  os.write(kMagic, 8);
  put_u32(os, static_cast<uint32_t>(f.resolution));
  put_u32(os, static_cast<uint32_t>(f.components.size()));
  uint8_t tag = rank_tag(f.rank);
  os.write(reinterpret_cast<const char*>(&tag), 1);
  const std::size_t expect =
      static_cast<std::size_t>(std::pow(static_cast<double>(f.resolution), 5));
  for (const auto& c : f.components) {
    if (c.size() != expect)
      throw io_error(path + ": component size does not match resolution^5");
    os.write(reinterpret_cast<const char*>(c.data()),
             static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
  if (!os) throw io_error(path + ": short write");
  std::ofstream sj(path + ".json");
  if (!sj) throw io_error(path + ".json: cannot open for writing");
  sj << sidecar_json << "\n";
}

field_dump read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error(path + ": cannot open");
  char magic[8];
  if (!is.read(magic, 8))
    throw io_error(path + ": truncated header at offset 0");
  for (int i = 0; i < 8; ++i)
    if (magic[i] != kMagic[i])
      throw io_error(path + ": bad magic byte at offset " + std::to_string(i));
  field_dump f;
  f.resolution = static_cast<int>(get_u32(is, path, 8));
  uint32_t ncomp = get_u32(is, path, 12);
  uint8_t tag = 0;
  if (!is.read(reinterpret_cast<char*>(&tag), 1))
    throw io_error(path + ": truncated header at offset 16");
  f.rank = rank_from_tag(tag, path);
  const std::size_t expect =
      static_cast<std::size_t>(std::pow(static_cast<double>(f.resolution), 5));
  f.components.resize(ncomp);
  long offset = 17;
  for (auto& c : f.components) {
    c.resize(expect);
    if (!is.read(reinterpret_cast<char*>(c.data()),
                 static_cast<std::streamsize>(expect * sizeof(double))))
      throw io_error(path + ": truncated payload at offset " +
                     std::to_string(offset));
    offset += static_cast<long>(expect * sizeof(double));
  }
  return f;
}

std::string read_sidecar(const std::string& path) {
  std::ifstream is(path + ".json");
  if (!is) throw io_error(path + ".json: cannot open");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* norm_kind_name(norm_kind k) {
  switch (k) {
    case norm_kind::linf:
      return "Linf";
    case norm_kind::holder:
      return "Holder";
    case norm_kind::c1kappa:
      return "C1kappa";
    case norm_kind::lp:
      return "Lp";
    case norm_kind::neg_sobolev:
      return "NegSobolev";
    case norm_kind::carleson:
      return "Carleson";
    case norm_kind::ynorm:
      return "Ynorm";
    case norm_kind::xnorm:
      return "Xnorm";
  }
  return "?";
}

const char* norm_method_name(norm_method m) {
  switch (m) {
    case norm_method::dense_sampling:
      return "dense_sampling";
    case norm_method::quadrature:
      return "quadrature";
    case norm_method::spectral:
      return "spectral";
  }
  return "?";
}

std::string norm_table_csv(
    const std::vector<std::pair<std::string, norm_estimate_t>>& rows) {
  std::ostringstream os;
  os << "label,kind,value,lower,method,sample_budget\n";
  os.precision(17);
  for (const auto& [label, e] : rows)
    os << label << ',' << norm_kind_name(e.kind) << ',' << e.value << ','
       << e.lower << ',' << norm_method_name(e.method) << ','
       << e.sample_budget << "\n";
  return os.str();
}

}  // namespace mkd5
