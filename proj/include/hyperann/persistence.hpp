#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "kdtree.hpp"
#include "lsh.hpp"
#include "oracles.hpp"

namespace hyperann {

/**
 *  Binary index container: "HYNN", a format version byte, a kind byte, then
 *  little-endian u64/f64 fields. The dataset (ids, coordinates, boundary
 *  gaps) always comes first, followed by kind-specific structure.
 */
inline constexpr char kIndexMagic[4] = {'H', 'Y', 'N', 'N'};
inline constexpr std::uint8_t kIndexFormatVersion = 1;

enum class IndexKind : std::uint8_t { brute = 0, kdtree = 1, lsh = 2 };

using AnyIndex = std::variant<BruteForceOracle, KdTree, LshIndex>;

namespace detail {

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u64(std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
        out_.write(buf, 8);
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  private:
    std::ostream& out_;
};

class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::uint8_t u8() {
        char c = 0;
        if (!in_.get(c)) throw std::runtime_error("index file truncated");
        return static_cast<std::uint8_t>(c);
    }
    std::uint64_t u64() {
        unsigned char buf[8];
        if (!in_.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("index file truncated");
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }

    /// Count field with a sanity cap so corrupt files fail fast instead of allocating.
    std::size_t count(std::uint64_t cap, char const* what) {
        std::uint64_t const v = u64();
        if (v > cap) throw std::runtime_error(std::string("index file: implausible ") + what + " " + std::to_string(v));
        return static_cast<std::size_t>(v);
    }

  private:
    std::istream& in_;
};

inline constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 40;

inline void write_dataset(Writer& w, Dataset const& data) {
    w.u64(data.size());
    w.u64(data.dim());
    for (std::size_t p = 0; p < data.size(); ++p) {
        w.i64(data.id(p));
        for (double v : data.coords(p)) w.f64(v);
        w.f64(data.point(p).boundary_gap());
    }
}

inline Dataset read_dataset(Reader& r, std::optional<std::size_t> expected_dim) {
    std::size_t const n = r.count(kMaxCount, "point count");
    std::size_t const dim = r.count(1u << 24, "dimension");
    if (n > 0 && dim == 0) throw std::runtime_error("index file: zero dimension");
    if (expected_dim && dim != 0 && dim != *expected_dim)
        throw std::runtime_error("index dimension " + std::to_string(dim) + " does not match expected " +
                                 std::to_string(*expected_dim));
    Dataset data(dim);
    for (std::size_t p = 0; p < n; ++p) {
        point_id_t const id = r.i64();
        std::vector<double> coords(dim);
        for (auto& v : coords) v = r.f64();
        double const gap = r.f64();
        data.add(id, Point(std::move(coords), gap));
    }
    return data;
}

inline void write_header(Writer& w, IndexKind kind) {
    for (char c : kIndexMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u8(kIndexFormatVersion);
    w.u8(static_cast<std::uint8_t>(kind));
}

inline void write_body(Writer& w, BruteForceOracle const& index) {
    write_header(w, IndexKind::brute);
    write_dataset(w, index.data());
}

inline void write_body(Writer& w, KdTree const& index) {
    write_header(w, IndexKind::kdtree);
    write_dataset(w, index.data());
    w.u64(index.nodes().size());
    for (auto const& n : index.nodes()) {
        w.u64(n.begin);
        w.u64(n.end);
        w.i64(n.left);
        w.i64(n.right);
        w.u64(n.split_dim);
        w.f64(n.split_value);
    }
    w.u64(index.order().size());
    for (auto p : index.order()) w.u64(p);
}

inline void write_body(Writer& w, LshIndex const& index) {
    write_header(w, IndexKind::lsh);
    write_dataset(w, index.data());
    auto const& p = index.params();
    w.u64(p.num_tables);
    w.u64(p.hyperplanes_per_table);
    w.f64(p.granularity);
    w.i64(p.probe_radius);
    w.u64(p.seed);
    auto const& planes = *index.hyperplanes();
    w.u64(planes.dim());
    for (double v : planes.normals()) w.f64(v);
    for (auto const& table : index.tables()) {
        // Sorted so equal indexes serialize to equal bytes.
        std::vector<LshTable::const_iterator> buckets;
        for (auto it = table.begin(); it != table.end(); ++it) buckets.push_back(it);
        std::sort(buckets.begin(), buckets.end(), [](auto a, auto b) { return a->first < b->first; });
        w.u64(buckets.size());
        for (auto it : buckets) {
            for (auto v : it->first) w.i64(v);
            w.u64(it->second.size());
            for (auto pos : it->second) w.u64(pos);
        }
    }
}

} // namespace detail

inline void save_index(std::ostream& out, AnyIndex const& index) {
    detail::Writer w(out);
    std::visit([&](auto const& idx) { detail::write_body(w, idx); }, index);
    if (!out) throw std::runtime_error("failed writing index");
}

inline void save_index(std::string const& path, AnyIndex const& index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_index(out, index);
}

inline AnyIndex load_index(std::istream& in, std::optional<std::size_t> expected_dim = std::nullopt) {
    detail::Reader r(in);
    char magic[4];
    for (auto& c : magic) c = static_cast<char>(r.u8());
    if (!std::equal(magic, magic + 4, kIndexMagic)) throw std::runtime_error("not an index file (bad magic)");
    std::uint8_t const version = r.u8();
    if (version != kIndexFormatVersion)
        throw std::runtime_error("unsupported index format version " + std::to_string(version));
    std::uint8_t const kind = r.u8();
    if (kind > static_cast<std::uint8_t>(IndexKind::lsh))
        throw std::runtime_error("unknown index kind " + std::to_string(kind));
    Dataset data = detail::read_dataset(r, expected_dim);

    switch (static_cast<IndexKind>(kind)) {
    case IndexKind::brute: return BruteForceOracle(std::move(data));
    case IndexKind::kdtree: {
        std::size_t const node_count = r.count(detail::kMaxCount, "node count");
        std::vector<KdTree::Node> nodes(node_count);
        for (auto& n : nodes) {
            n.begin = static_cast<std::uint32_t>(r.u64());
            n.end = static_cast<std::uint32_t>(r.u64());
            n.left = static_cast<std::int32_t>(r.i64());
            n.right = static_cast<std::int32_t>(r.i64());
            n.split_dim = static_cast<std::uint32_t>(r.u64());
            n.split_value = r.f64();
        }
        std::size_t const order_count = r.count(detail::kMaxCount, "order length");
        std::vector<std::uint32_t> order(order_count);
        for (auto& p : order) p = static_cast<std::uint32_t>(r.u64());
        return KdTree(std::move(data), std::move(nodes), std::move(order));
    }
    case IndexKind::lsh: {
        LshParams p;
        p.num_tables = r.count(1u << 16, "table count");
        p.hyperplanes_per_table = r.count(1u << 16, "hyperplane count");
        p.granularity = r.f64();
        p.probe_radius = static_cast<int>(r.i64());
        p.seed = r.u64();
        p.validate();
        std::size_t const dim = r.count(1u << 24, "hyperplane dimension");
        if (data.dim() != 0 && dim != data.dim()) throw std::runtime_error("hyperplane dimension mismatch");
        std::vector<double> normals(dim * p.num_tables * p.hyperplanes_per_table);
        for (auto& v : normals) v = r.f64();
        auto planes = std::make_shared<const HyperplaneSet>(dim, p.num_tables, p.hyperplanes_per_table, std::move(normals));
        std::vector<LshTable> tables(p.num_tables);
        for (auto& table : tables) {
            std::size_t const buckets = r.count(detail::kMaxCount, "bucket count");
            for (std::size_t b = 0; b < buckets; ++b) {
                LshKey key(p.hyperplanes_per_table);
                for (auto& v : key) v = static_cast<std::int32_t>(r.i64());
                std::size_t const members = r.count(detail::kMaxCount, "bucket size");
                std::vector<std::uint32_t> bucket(members);
                for (auto& pos : bucket) pos = static_cast<std::uint32_t>(r.u64());
                table.emplace(std::move(key), std::move(bucket));
            }
        }
        return LshIndex(std::move(data), p, std::move(planes), std::move(tables));
    }
    }
    throw std::runtime_error("unknown index kind");
}

inline AnyIndex load_index(std::string const& path, std::optional<std::size_t> expected_dim = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index '" + path + "'");
    return load_index(in, expected_dim);
}

} // namespace hyperann
