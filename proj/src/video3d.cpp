#include "vid3d/video3d.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "vid3d/error.hpp"

namespace vid3d {

namespace {

constexpr char kMagic[4] = {'V', '3', 'D', 'Z'};

std::uint32_t crc(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
    std::vector<std::uint8_t> buf;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : buf_(b) {}
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw ChecksumError("v3dz: file is truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    const std::uint8_t* take(std::size_t n) {
        need(n);
        const auto* p = buf_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::size_t pos() const { return pos_; }
    const std::uint8_t* at(std::size_t p) const { return buf_.data() + p; }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

nlohmann::json header_json(const Video3D& v) {
    return {{"cameras", manifest_to_json(v.cameras)},
            {"frame_indices", v.frame_indices},
            {"provenance",
             {{"config_hash", v.provenance.config_hash},
              {"global_seed", v.provenance.global_seed},
              {"frame_seeds", v.provenance.frame_seeds},
              {"config", v.provenance.config}}}};
}

}  // namespace

std::vector<std::uint8_t> encode_video3d(const Video3D& v) {
    if (!v.frame_indices.empty() && v.frame_indices.size() != v.clouds.size()) {
        throw InvalidArgument("Video3D frame_indices length differs from cloud count");
    }
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kV3dzVersion);
    const std::string header = header_json(v).dump();
    w.u32(static_cast<std::uint32_t>(header.size()));
    w.bytes(header.data(), header.size());
    w.u32(crc(reinterpret_cast<const std::uint8_t*>(header.data()), header.size()));
    w.u32(static_cast<std::uint32_t>(v.clouds.size()));
    std::vector<float> params;
    for (std::size_t f = 0; f < v.clouds.size(); ++f) {
        const auto& cloud = v.clouds[f];
        const std::size_t start = w.buf.size();
        w.u32(static_cast<std::uint32_t>(v.frame_indices.empty() ? f : v.frame_indices[f]));
        w.u32(static_cast<std::uint32_t>(cloud.size()));
        for (int c = 0; c < 3; ++c) w.f32(cloud.background[c]);
        params.resize(cloud.size() * Gaussian3D::kParamCount);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            pack_params(cloud.gaussians[i], params.data() + i * Gaussian3D::kParamCount);
        }
        for (float p : params) w.f32(p);
        w.u32(crc(w.buf.data() + start, w.buf.size() - start));
    }
    return w.buf;
}

Video3D decode_video3d(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (bytes.size() < 4) throw ChecksumError("v3dz: file is truncated");
    if (std::memcmp(r.take(4), kMagic, 4) != 0) {
        throw FormatError("v3dz: bad magic (not a .v3dz file)");
    }
    const std::uint32_t version = r.u32();
    if (version != kV3dzVersion) {
        throw VersionMismatchError("v3dz: version " + std::to_string(version) + ", expected " +
                                   std::to_string(kV3dzVersion));
    }
    const std::uint32_t header_len = r.u32();
    const std::uint8_t* hp = r.take(header_len);
    if (r.u32() != crc(hp, header_len)) throw ChecksumError("v3dz: header checksum mismatch");

    Video3D v;
    try {
        const auto h = nlohmann::json::parse(hp, hp + header_len);
        v.cameras = manifest_from_json(h.at("cameras"));
        v.frame_indices = h.at("frame_indices").get<std::vector<int>>();
        const auto& p = h.at("provenance");
        v.provenance.config_hash = p.at("config_hash").get<std::string>();
        v.provenance.global_seed = p.at("global_seed").get<std::uint64_t>();
        v.provenance.frame_seeds = p.at("frame_seeds").get<std::vector<std::uint64_t>>();
        v.provenance.config = p.at("config");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("v3dz: malformed header: ") + e.what());
    }

    const std::uint32_t frames = r.u32();
    std::vector<int> indices;
    for (std::uint32_t f = 0; f < frames; ++f) {
        const std::size_t start = r.pos();
        indices.push_back(static_cast<int>(r.u32()));
        const std::uint32_t n = r.u32();
        r.need(static_cast<std::size_t>(n) * Gaussian3D::kParamCount * 4 + 16);
        GaussianCloud cloud;
        for (int c = 0; c < 3; ++c) cloud.background[c] = r.f32();
        cloud.gaussians.resize(n);
        std::array<float, Gaussian3D::kParamCount> p{};
        for (std::uint32_t i = 0; i < n; ++i) {
            for (auto& x : p) x = r.f32();
            cloud.gaussians[i] = unpack_params(p.data());
        }
        const std::size_t end = r.pos();
        if (r.u32() != crc(r.at(start), end - start)) {
            throw ChecksumError("v3dz: checksum mismatch in frame " + std::to_string(f));
        }
        v.clouds.push_back(std::move(cloud));
    }
    if (!r.at_end()) throw FormatError("v3dz: trailing bytes after last frame");
    if (v.frame_indices != indices) throw FormatError("v3dz: frame index table disagrees with frame blocks");
    return v;
}

void save_video3d(const std::filesystem::path& path, const Video3D& v) {
    const auto bytes = encode_video3d(v);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

Video3D load_video3d(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_video3d(bytes);
}

void export_ply(const std::filesystem::path& path, const GaussianCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n'
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "property float color_r\nproperty float color_g\nproperty float color_b\n"
        << "property float opacity\n"
        << "property float scale_0\nproperty float scale_1\nproperty float scale_2\n"
        << "property float rot_0\nproperty float rot_1\nproperty float rot_2\nproperty float rot_3\n"
        << "end_header\n";
    out.precision(9);
    for (const auto& g : cloud.gaussians) {
        out << g.mean.x() << ' ' << g.mean.y() << ' ' << g.mean.z();
        for (int c = 0; c < 3; ++c) {
            const float v = std::clamp(g.color[c], 0.0f, 1.0f);
            out << ' ' << static_cast<int>(std::lround(v * 255.0f));
        }
        out << ' ' << g.color.x() << ' ' << g.color.y() << ' ' << g.color.z() << ' ' << g.opacity_logit;
        for (int a = 0; a < 3; ++a) out << ' ' << g.log_scale[a];
        for (int a = 0; a < 4; ++a) out << ' ' << g.rotation[a];
        out << '\n';
    }
}

std::vector<PlyPoint> read_ply_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t count = 0;
    std::vector<std::string> props;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "element") {
            std::string kind;
            ls >> kind >> count;
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            props.push_back(name);
        } else if (tok == "end_header") {
            break;
        }
    }
    auto index_of = [&](const std::string& name) {
        const auto it = std::find(props.begin(), props.end(), name);
        if (it == props.end()) throw FormatError("PLY is missing property " + name);
        return static_cast<std::size_t>(it - props.begin());
    };
    const std::array<std::size_t, 7> idx{index_of("x"),       index_of("y"),       index_of("z"),
                                         index_of("color_r"), index_of("color_g"), index_of("color_b"),
                                         index_of("opacity")};
    std::vector<PlyPoint> points;
    std::vector<float> row(props.size());
    for (std::size_t i = 0; i < count; ++i) {
        for (auto& v : row) {
            if (!(in >> v)) throw FormatError("PLY body ended early");
        }
        PlyPoint p;
        p.mean = {row[idx[0]], row[idx[1]], row[idx[2]]};
        p.color = {row[idx[3]], row[idx[4]], row[idx[5]]};
        p.opacity_logit = row[idx[6]];
        points.push_back(p);
    }
    return points;
}

}  // namespace vid3d
