#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "photongate/detector.hpp"
#include "photongate/error.hpp"

namespace photongate {

namespace {

constexpr std::size_t kHeaderBytes = 12;
constexpr std::size_t kRecordBytes = 9;

template <class T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(const unsigned char* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(p[i]) << (8 * i);
    return value;
}

}  // namespace

void write_timetags(std::ostream& out, std::span<const TimeTag> tags) {
    out.write(kTimeTagMagic.data(), static_cast<std::streamsize>(kTimeTagMagic.size()));
    put_le<std::uint32_t>(out, kTimeTagVersion);
    for (const auto& tag : tags) {
        put_le<std::uint64_t>(out, tag.ticks);
        out.put(static_cast<char>(tag.channel));
    }
}

std::vector<TimeTag> read_timetags(std::istream& in) {
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.empty()) throw FormatError("empty time-tag file", 0);
    if (data.size() < kTimeTagMagic.size() ||
        data.compare(0, kTimeTagMagic.size(), kTimeTagMagic) != 0)
        throw FormatError("bad magic, expected SPSLTTAG", 0);
    if (data.size() < kHeaderBytes) throw FormatError("truncated header", data.size());
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    const auto version = get_le<std::uint32_t>(bytes + 8);
    if (version != kTimeTagVersion)
        throw FormatError("unsupported version " + std::to_string(version), 8);

    const std::size_t body = data.size() - kHeaderBytes;
    if (body % kRecordBytes != 0) {
        const std::size_t offset = kHeaderBytes + (body / kRecordBytes) * kRecordBytes;
        throw FormatError("truncated record: " + std::to_string(data.size() - offset) + " of 9 bytes",
                          offset);
    }
    std::vector<TimeTag> tags(body / kRecordBytes);
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const auto* rec = bytes + kHeaderBytes + i * kRecordBytes;
        tags[i].ticks = get_le<std::uint64_t>(rec);
        tags[i].channel = rec[8];
    }
    return tags;
}

void write_timetags_csv(std::ostream& out, std::span<const TimeTag> tags) {
    out << "ticks,channel\n";
    for (const auto& tag : tags) out << tag.ticks << ',' << static_cast<unsigned>(tag.channel) << '\n';
}

std::vector<TimeTag> read_timetags_csv(std::istream& in) {
    std::string line;
    std::uint64_t offset = 0;
    if (!std::getline(in, line)) throw FormatError("empty time-tag file", 0);
    if (line != "ticks,channel") throw FormatError("expected header 'ticks,channel'", 0);
    offset += line.size() + 1;
    std::vector<TimeTag> tags;
    while (std::getline(in, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        const auto comma = line.find(',');
        TimeTag tag;
        unsigned channel = 0;
        const char* end = line.data() + line.size();
        auto r1 = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma),
                                  tag.ticks);
        auto r2 = comma == std::string::npos
                      ? std::from_chars_result{line.data(), std::errc::invalid_argument}
                      : std::from_chars(line.data() + comma + 1, end, channel);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || r2.ptr != end || channel > 255)
            throw FormatError("malformed time-tag row '" + line + "'", offset);
        tag.channel = static_cast<std::uint8_t>(channel);
        tags.push_back(tag);
        offset += line.size() + 1;
    }
    return tags;
}

}  // namespace photongate
