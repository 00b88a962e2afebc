#include "fermech/param_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "fermech/errors.hpp"

namespace fermech::paramio {

namespace {

std::string next_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) return line;
    }
    throw DataError("checkpoint: unexpected end of file");
}

std::string hexfloat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

}  // namespace

void write_kv(std::ostream& os, const std::string& key, const std::string& value) {
    os << key << " " << value << "\n";
}

void write_kv(std::ostream& os, const std::string& key, std::uint64_t value) {
    os << key << " " << value << "\n";
}

std::string read_kv(std::istream& is, const std::string& expect_key) {
    std::string line = next_line(is);
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != expect_key) {
        throw DataError("checkpoint: expected key '" + expect_key + "', found '" + key + "'");
    }
    std::string rest;
    ls >> rest;
    return rest;
}

std::uint64_t read_kv_u64(std::istream& is, const std::string& expect_key) {
    std::string v = read_kv(is, expect_key);
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw DataError("checkpoint: key '" + expect_key + "' has non-integer value '" + v + "'");
    }
}

void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
    os << "tensor " << name << " " << t.rank();
    for (std::size_t d : t.shape()) os << " " << d;
    os << "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << " ";
        os << hexfloat(t[i]);
    }
    os << "\n";
}

Tensor read_tensor(std::istream& is, const std::string& expect_name) {
    std::istringstream hdr(next_line(is));
    std::string tag, name;
    std::size_t rank = 0;
    hdr >> tag >> name >> rank;
    if (tag != "tensor" || name != expect_name) {
        throw DataError("checkpoint: expected tensor '" + expect_name + "', found '" + tag +
                        " " + name + "'");
    }
    std::vector<std::size_t> shape(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        if (!(hdr >> shape[i])) throw DataError("checkpoint: bad shape for tensor " + name);
    }
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;

    std::string values = next_line(is);
    std::vector<double> data;
    data.reserve(count);
    const char* p = values.c_str();
    char* end = nullptr;
    for (std::size_t i = 0; i < count; ++i) {
        double v = std::strtod(p, &end);
        if (end == p) throw DataError("checkpoint: too few values for tensor " + name);
        data.push_back(v);
        p = end;
    }
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace fermech::paramio
