#include "frpt/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace frpt {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace {

constexpr char kMagic[4] = {'F', 'R', 'P', 'T'};

class Writer {
   public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename U>
    void scalar(U v) {
        bytes(&v, sizeof(U));
    }
    std::vector<std::uint8_t>& buffer() { return out_; }

   private:
    std::vector<std::uint8_t> out_;
};

class Reader {
   public:
    Reader(std::span<const std::uint8_t> bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

    void take(void* dst, std::size_t n, const std::string& what) {
        if (pos_ + n > limit_) throw FormatError("truncated container: missing " + what, pos_);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }
    template <typename U>
    U scalar(const std::string& what) {
        U v;
        take(&v, sizeof(U), what);
        return v;
    }
    std::size_t pos() const { return pos_; }

   private:
    std::span<const std::uint8_t> bytes_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> encode_container(const ArrayList& arrays) {
    Writer w;
    w.bytes(kMagic, 4);
    w.scalar<std::uint32_t>(kContainerVersion);
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        if (a.name.size() > 0xFFFF) throw ConfigError("array name too long: " + a.name);
        w.scalar<std::uint16_t>(static_cast<std::uint16_t>(a.name.size()));
        w.bytes(a.name.data(), a.name.size());
        const Shape& s = a.tensor.shape();
        w.scalar<std::uint8_t>(static_cast<std::uint8_t>(s.size()));
        for (std::size_t d : s) w.scalar<std::uint32_t>(static_cast<std::uint32_t>(d));
        w.scalar<std::uint8_t>(kDtypeF32);
        w.bytes(a.tensor.data().data(), a.tensor.size() * sizeof(float));
    }
    const std::uint32_t crc = crc_of(w.buffer());
    w.scalar<std::uint32_t>(crc);
    return std::move(w.buffer());
}

ArrayList decode_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic", 0);
    // The trailing 4 bytes are the checksum; arrays must end before it.
    const std::size_t limit = bytes.size() >= 4 ? bytes.size() - 4 : 0;
    Reader r(bytes, limit);
    char magic[4];
    r.take(magic, 4, "magic");
    const std::size_t version_at = r.pos();
    const auto version = r.scalar<std::uint32_t>("version");
    if (version != kContainerVersion) {
        throw FormatError("unsupported container version " + std::to_string(version), version_at);
    }
    const auto count = r.scalar<std::uint32_t>("array count");
    ArrayList arrays;
    arrays.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string label = "array #" + std::to_string(i);
        const auto name_len = r.scalar<std::uint16_t>("name length of " + label);
        std::string name(name_len, '\0');
        r.take(name.data(), name_len, "name of " + label);
        label = "array '" + name + "'";
        const std::size_t rank_at = r.pos();
        const auto rank = r.scalar<std::uint8_t>("rank of " + label);
        if (rank < 1 || rank > 4) throw FormatError("invalid rank " + std::to_string(rank) + " for " + label, rank_at);
        Shape shape(rank);
        for (auto& d : shape) d = r.scalar<std::uint32_t>("dims of " + label);
        const std::size_t dtype_at = r.pos();
        const auto dtype = r.scalar<std::uint8_t>("dtype of " + label);
        if (dtype != kDtypeF32) throw FormatError("unknown dtype " + std::to_string(dtype) + " for " + label, dtype_at);
        std::vector<float> data(numel(shape));
        r.take(data.data(), data.size() * sizeof(float), "data of " + label);
        arrays.push_back({std::move(name), Tensor<float>(std::move(shape), std::move(data))});
    }
    if (r.pos() != limit) throw FormatError("unexpected trailing bytes after last array", r.pos());
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + limit, 4);
    if (stored != crc_of(bytes.first(limit))) throw FormatError("checksum mismatch", limit);
    return arrays;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_container(const std::filesystem::path& path, const ArrayList& arrays) {
    const auto bytes = encode_container(arrays);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

ArrayList read_container(const std::filesystem::path& path) { return decode_container(read_file_bytes(path)); }

const Tensor<float>* find_array(const ArrayList& arrays, const std::string& name) {
    for (const auto& a : arrays)
        if (a.name == name) return &a.tensor;
    return nullptr;
}

const Tensor<float>& require_array(const ArrayList& arrays, const std::string& name) {
    const auto* t = find_array(arrays, name);
    if (!t) throw StructureError("container has no array '" + name + "'");
    return *t;
}

}  // namespace frpt
