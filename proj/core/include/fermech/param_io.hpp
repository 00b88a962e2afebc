#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "fermech/tensor.hpp"

namespace fermech::paramio {

// Checkpoint plumbing: named key/value and tensor records in a line-oriented
// text format. Values are written as hexfloats, so round-trips are bit-exact.

void write_kv(std::ostream& os, const std::string& key, const std::string& value);
void write_kv(std::ostream& os, const std::string& key, std::uint64_t value);

// Reads the next non-empty line as "key rest"; DataError if key differs.
std::string read_kv(std::istream& is, const std::string& expect_key);
std::uint64_t read_kv_u64(std::istream& is, const std::string& expect_key);

// "tensor NAME rank d0 d1 ..." followed by one line of space-separated
// hexfloat values.
void write_tensor(std::ostream& os, const std::string& name, const Tensor& t);
Tensor read_tensor(std::istream& is, const std::string& expect_name);

}  // namespace fermech::paramio
