#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nutrec/types.hpp"

namespace nutrec {

inline std::uint64_t fnv1a64(const void* bytes, std::size_t n, std::uint64_t h = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

// Hash of the ingredient vocabulary, embedded in every model file so a model
// trained against one table cannot be silently applied to another.
inline std::uint64_t vocabulary_hash(const std::vector<std::string>& names) {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& name : names) {
        h = fnv1a64(name.data(), name.size(), h);
        h = fnv1a64("\n", 1, h);
    }
    return h;
}

// Little-endian binary writer. All model and cache files go through this so
// identical inputs produce byte-identical files.
class ByteWriter {
public:
    explicit ByteWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot open for writing: " + path);
    }

    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void f64s(const std::vector<double>& v) {
        for (double x : v) f64(x);
    }

    void finish(const std::string& path) {
        out_.flush();
        if (!out_) throw DataError("write failed: " + path);
    }

private:
    std::ofstream out_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw DataError("cannot open: " + path);
    }

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw DataError("truncated file: " + path_);
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    std::string str() {
        const std::uint32_t n = u32();
        std::string s(n, '\0');
        if (n) bytes(s.data(), n);
        return s;
    }
    void f64s(std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = f64();
    }

    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
};

inline void expect_tag(ByteReader& r, const char tag[4]) {
    char got[4];
    r.bytes(got, 4);
    if (std::memcmp(got, tag, 4) != 0)
        throw DataError("unexpected file format in " + r.path() + " (want " + std::string(tag, 4) + ")");
}

inline void check_vocab_hash(std::uint64_t fileHash, std::uint64_t corpusHash, const std::string& what) {
    if (fileHash != corpusHash)
        throw ModelCompatError(what + " was built against a different ingredient vocabulary");
}

}  // namespace nutrec
