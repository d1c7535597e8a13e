#include <cstdint>

#include "ctig/corpus.hpp"

namespace ctig {

namespace {

std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 3]));
}

std::uint16_t read_be16(std::string_view bytes, std::size_t offset) {
    return static_cast<std::uint16_t>(
        (static_cast<unsigned char>(bytes[offset]) << 8) |
        static_cast<unsigned char>(bytes[offset + 1]));
}

constexpr char kPngSignature[] = "\x89PNG\r\n\x1a\n";

ImageProbe probe_png(std::string_view bytes) {
    ImageProbe probe;
    if (bytes.size() < 8 || bytes.substr(0, 8) != std::string_view(kPngSignature, 8)) {
        probe.error = "missing PNG signature";
        return probe;
    }
    // IHDR must be the first chunk; walk chunks to IEND to prove structural
    // completeness.
    std::size_t pos = 8;
    bool have_ihdr = false;
    bool have_iend = false;
    while (pos + 12 <= bytes.size()) {
        std::uint32_t length = read_be32(bytes, pos);
        std::string_view type = bytes.substr(pos + 4, 4);
        std::size_t chunk_end = pos + 12 + length;
        if (chunk_end < pos || chunk_end > bytes.size()) {
            probe.error = "truncated chunk " + std::string(type);
            return probe;
        }
        if (!have_ihdr) {
            if (type != "IHDR" || length < 13) {
                probe.error = "first chunk is not a valid IHDR";
                return probe;
            }
            probe.width = static_cast<int>(read_be32(bytes, pos + 8));
            probe.height = static_cast<int>(read_be32(bytes, pos + 12));
            have_ihdr = true;
        }
        if (type == "IEND") {
            have_iend = true;
            break;
        }
        pos = chunk_end;
    }
    if (!have_ihdr || !have_iend) {
        probe.error = have_ihdr ? "no IEND chunk; file is truncated" : "no IHDR chunk";
        return probe;
    }
    if (probe.width <= 0 || probe.height <= 0) {
        probe.error = "non-positive dimensions";
        return probe;
    }
    probe.ok = true;
    return probe;
}

ImageProbe probe_jpeg(std::string_view bytes) {
    ImageProbe probe;
    if (bytes.size() < 4 || static_cast<unsigned char>(bytes[0]) != 0xFF ||
        static_cast<unsigned char>(bytes[1]) != 0xD8) {
        probe.error = "missing JPEG SOI marker";
        return probe;
    }
    if (static_cast<unsigned char>(bytes[bytes.size() - 2]) != 0xFF ||
        static_cast<unsigned char>(bytes[bytes.size() - 1]) != 0xD9) {
        probe.error = "missing JPEG EOI trailer; file is truncated";
        return probe;
    }
    std::size_t pos = 2;
    while (pos + 4 <= bytes.size()) {
        if (static_cast<unsigned char>(bytes[pos]) != 0xFF) {
            ++pos;
            continue;
        }
        unsigned char marker = static_cast<unsigned char>(bytes[pos + 1]);
        if (marker == 0xFF) {
            ++pos;
            continue;
        }
        // SOF0..SOF15 except DHT/JPG/DAC carry the frame dimensions.
        bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                      marker != 0xCC;
        if (is_sof) {
            if (pos + 9 > bytes.size()) {
                probe.error = "truncated SOF segment";
                return probe;
            }
            probe.height = read_be16(bytes, pos + 5);
            probe.width = read_be16(bytes, pos + 7);
            if (probe.width <= 0 || probe.height <= 0) {
                probe.error = "non-positive dimensions";
                return probe;
            }
            probe.ok = true;
            return probe;
        }
        if (marker == 0xD9 || marker == 0xDA) break;  // EOI / start of scan
        std::uint16_t seg_len = read_be16(bytes, pos + 2);
        if (seg_len < 2) {
            probe.error = "invalid segment length";
            return probe;
        }
        pos += 2 + seg_len;
    }
    probe.error = "no SOF segment with dimensions";
    return probe;
}

}  // namespace

std::string_view media_type_mime(MediaType m) {
    return m == MediaType::png ? "image/png" : "image/jpeg";
}

std::optional<MediaType> sniff_media_type(std::string_view bytes) {
    if (bytes.size() >= 8 && bytes.substr(0, 8) == std::string_view(kPngSignature, 8)) {
        return MediaType::png;
    }
    if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
        static_cast<unsigned char>(bytes[1]) == 0xD8 &&
        static_cast<unsigned char>(bytes[2]) == 0xFF) {
        return MediaType::jpeg;
    }
    return std::nullopt;
}

ImageProbe probe_image(MediaType media_type, std::string_view bytes) {
    return media_type == MediaType::png ? probe_png(bytes) : probe_jpeg(bytes);
}

}  // namespace ctig
