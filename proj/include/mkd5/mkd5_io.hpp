#pragma once

#include <string>
#include <vector>

#include "mkd5/field_expr.hpp"
#include "mkd5/norms.hpp"

namespace mkd5 {

// binary field dump: magic "MKD5\0\0\0\1", little-endian u32 resolution,
// u32 component count, u8 rank tag, then row-major float64 node samples per
// component; a JSON sidecar `<path>.json` carries free-form parameters
struct field_dump {
  int resolution = 0;
  rank_t rank = rank_t::scalar;
  std::vector<std::vector<double>> components;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_field(const std::string& path, const field_dump& f,
                 const std::string& sidecar_json);
field_dump read_field(const std::string& path);
std::string read_sidecar(const std::string& path);

// CSV table of norm estimates, one row per (label, estimate)
std::string norm_table_csv(
    const std::vector<std::pair<std::string, norm_estimate_t>>& rows);

const char* norm_kind_name(norm_kind k);
const char* norm_method_name(norm_method m);

}  // namespace mkd5
