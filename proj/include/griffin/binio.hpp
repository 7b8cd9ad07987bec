// Little-endian binary primitives shared by the snapshot/checkpoint writers.
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace griffin::binio {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}
inline void put_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}
inline void put_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}
inline void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline void put_i64_array(std::ostream& out, const std::vector<std::int64_t>& v) {
    put_i64(out, static_cast<std::int64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}
inline void put_f64_array(std::ostream& out, const std::vector<double>& v) {
    put_i64(out, static_cast<std::int64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}

inline std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
inline std::int64_t get_i64(std::istream& in) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
inline double get_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
inline std::string get_string(std::istream& in) {
    const std::uint32_t len = get_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}
inline std::vector<std::int64_t> get_i64_array(std::istream& in) {
    const std::int64_t len = get_i64(in);
    std::vector<std::int64_t> v(len);
    in.read(reinterpret_cast<char*>(v.data()), len * 8);
    return v;
}
inline std::vector<double> get_f64_array(std::istream& in) {
    const std::int64_t len = get_i64(in);
    std::vector<double> v(len);
    in.read(reinterpret_cast<char*>(v.data()), len * 8);
    return v;
}

}  // namespace griffin::binio
