#ifndef PQPKI_IO_HPP
#define PQPKI_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"

namespace pqpki {

inline Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path);
    const std::string& s = ss.str();
    return Bytes(s.begin(), s.end());
}

inline std::string read_text_file(const std::string& path) {
    Bytes b = read_file(path);
    return std::string(b.begin(), b.end());
}

inline void write_file(const std::string& path, ByteView data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for " + path);
}

inline void write_text_file(const std::string& path, std::string_view text) {
    write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()),
                              text.size()));
}

}  // namespace pqpki

#endif
