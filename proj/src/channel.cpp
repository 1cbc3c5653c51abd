#include "dpcperm/channel.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dpcperm/error.hpp"
#include "dpcperm/rng.hpp"

namespace dpcperm {

namespace {

constexpr std::uint64_t kChannelTag = 0xC4A77E1;
constexpr std::uint64_t kTrialChannelTag = 0xC4A77E2;
constexpr std::array<char, 4> kMagic{'D', 'P', 'C', 'M'};

CMatrix draw_gaussian(std::size_t n, Stream& rng) {
    CMatrix h(n, n);
    for (cplx& z : h.data()) z = rng.complex_normal(1.0);
    return h;
}

template <typename T>
void put_le(std::vector<char>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    auto u = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>(u & 0xFF));
        u = static_cast<U>(u >> 8);
    }
}

template <typename T>
T get_le(const std::vector<char>& in, std::size_t& pos) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        u = static_cast<U>(u | (static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i)));
    }
    pos += sizeof(T);
    return std::bit_cast<T>(u);
}

}  // namespace

ChannelMatrix generate_channel(const ChannelSpec& spec) {
    if (spec.n_users == 0) throw Error(ErrorKind::InvalidArgument, "n_users must be >= 1");
    Stream rng = Stream::derive(spec.seed, {kChannelTag, spec.n_users});
    return ChannelMatrix(draw_gaussian(spec.n_users, rng));
}

ChannelMatrix generate_trial_channel(std::size_t n_users, std::uint64_t seed, std::uint64_t trial) {
    Stream rng = Stream::derive(seed, {kTrialChannelTag, n_users, trial});
    return ChannelMatrix(draw_gaussian(n_users, rng));
}

void save_channel(const ChannelMatrix& h, const std::filesystem::path& path) {
    std::vector<char> buf(kMagic.begin(), kMagic.end());
    put_le<std::uint16_t>(buf, kChannelFormatVersion);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(h.n()));
    for (const cplx& z : h.matrix().data()) {
        put_le<double>(buf, z.real());
        put_le<double>(buf, z.imag());
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

ChannelMatrix load_channel(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    const std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    constexpr std::size_t header = 4 + 2 + 4;
    if (buf.size() < header) throw Error(ErrorKind::FormatError, "file shorter than header");
    if (!std::equal(kMagic.begin(), kMagic.end(), buf.begin())) throw Error(ErrorKind::FormatError, "bad magic");
    std::size_t pos = 4;
    const auto version = get_le<std::uint16_t>(buf, pos);
    if (version != kChannelFormatVersion) {
        throw Error(ErrorKind::FormatError, "unsupported format version " + std::to_string(version));
    }
    const auto n = get_le<std::uint32_t>(buf, pos);
    if (n == 0) throw Error(ErrorKind::FormatError, "declared dimension is zero");
    const std::size_t expected = header + static_cast<std::size_t>(n) * n * 16;
    if (buf.size() != expected) {
        throw Error(ErrorKind::FormatError, "payload is " + std::to_string(buf.size() - header) +
                                                " bytes, declared n = " + std::to_string(n) + " needs " +
                                                std::to_string(expected - header));
    }
    CMatrix h(n, n);
    for (cplx& z : h.data()) {
        const double re = get_le<double>(buf, pos);
        const double im = get_le<double>(buf, pos);
        z = {re, im};
    }
    if (!all_finite(h)) throw Error(ErrorKind::FormatError, "non-finite entry in channel file");
    return ChannelMatrix(std::move(h));
}

}  // namespace dpcperm
