#include "varflow/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace varflow {

std::string read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoErrorCode::FileNotFound, "cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

namespace {

// Skips whitespace and '#' comments, then reads one decimal token.
long next_token(const std::string& data, std::size_t& pos, const std::string& path) {
    while (pos < data.size()) {
        if (std::isspace(static_cast<unsigned char>(data[pos]))) {
            ++pos;
        } else if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    if (pos >= data.size())
        throw IoError(IoErrorCode::MalformedHeader, path + ": unexpected end of header");
    std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start)
        throw IoError(IoErrorCode::MalformedHeader, path + ": expected a number in header");
    return std::stol(data.substr(start, pos - start));
}

}  // namespace

std::vector<ScalarField> read_image(const std::string& path) {
    const std::string data = read_file_bytes(path);
    if (data.size() < 2)
        throw IoError(IoErrorCode::MalformedHeader, path + ": empty or truncated file");
    if (data[0] != 'P' || data[1] < '1' || data[1] > '6')
        throw IoError(IoErrorCode::UnsupportedFormat, path + ": not a PNM file");
    const char kind = data[1];
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
        throw IoError(IoErrorCode::UnsupportedFormat,
                      path + ": only P2/P5 PGM and P3/P6 PPM are supported");
    const bool binary = kind == '5' || kind == '6';
    const int channels = (kind == '3' || kind == '6') ? 3 : 1;

    std::size_t pos = 2;
    const long nx = next_token(data, pos, path);
    const long ny = next_token(data, pos, path);
    const long maxval = next_token(data, pos, path);
    if (nx < 3 || ny < 3)
        throw IoError(IoErrorCode::MalformedHeader, path + ": image must be at least 3x3");
    if (maxval < 1 || maxval > 65535)
        throw IoError(IoErrorCode::UnsupportedMaxval, path + ": maxval must be in [1, 65535]");

    const GridSpec spec{static_cast<int>(nx), static_cast<int>(ny), 1.0, 1.0};
    const std::size_t npix = spec.size();
    std::vector<ScalarField> out(channels, ScalarField(spec));

    if (binary) {
        ++pos;  // single whitespace byte after maxval
        const int bytes_per = maxval > 255 ? 2 : 1;
        const std::size_t need = npix * channels * bytes_per;
        if (data.size() - pos < need)
            throw IoError(IoErrorCode::TruncatedPayload, path + ": payload shorter than header promises");
        for (std::size_t i = 0; i < npix; ++i)
            for (int c = 0; c < channels; ++c) {
                unsigned long v = static_cast<unsigned char>(data[pos++]);
                if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(data[pos++]);
                out[c][i] = static_cast<double>(v) / static_cast<double>(maxval);
            }
    } else {
        for (std::size_t i = 0; i < npix; ++i)
            for (int c = 0; c < channels; ++c) {
                long v;
                try {
                    v = next_token(data, pos, path);
                } catch (const IoError&) {
                    throw IoError(IoErrorCode::TruncatedPayload,
                                  path + ": fewer samples than header promises");
                }
                out[c][i] = static_cast<double>(v) / static_cast<double>(maxval);
            }
    }
    return out;
}

namespace {

void append_sample(std::string& payload, double v, int maxval) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    const unsigned long q = static_cast<unsigned long>(std::lround(clamped * maxval));
    if (maxval > 255) payload.push_back(static_cast<char>((q >> 8) & 0xff));
    payload.push_back(static_cast<char>(q & 0xff));
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(IoErrorCode::Unwritable, "cannot open " + path + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError(IoErrorCode::Unwritable, "short write to " + path);
}

}  // namespace

void write_pgm(const ScalarField& field, const std::string& path, int maxval) {
    if (maxval < 1 || maxval > 65535)
        throw IoError(IoErrorCode::UnsupportedMaxval, path + ": maxval must be in [1, 65535]");
    if (!field.all_finite())
        throw std::invalid_argument("write_pgm: non-finite values");
    std::string out = "P5\n" + std::to_string(field.nx()) + " " + std::to_string(field.ny()) +
                      "\n" + std::to_string(maxval) + "\n";
    for (std::size_t i = 0; i < field.size(); ++i) append_sample(out, field[i], maxval);
    write_bytes(path, out);
}

void write_ppm(const std::vector<ScalarField>& channels, const std::string& path, int maxval) {
    if (channels.size() != 3) throw std::invalid_argument("write_ppm: need exactly 3 channels");
    if (maxval < 1 || maxval > 65535)
        throw IoError(IoErrorCode::UnsupportedMaxval, path + ": maxval must be in [1, 65535]");
    const GridSpec& s = channels[0].spec();
    for (const auto& c : channels) {
        if (!(c.spec() == s)) throw std::invalid_argument("write_ppm: channel specs differ");
        if (!c.all_finite()) throw std::invalid_argument("write_ppm: non-finite values");
    }
    std::string out = "P6\n" + std::to_string(s.nx) + " " + std::to_string(s.ny) + "\n" +
                      std::to_string(maxval) + "\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int c = 0; c < 3; ++c) append_sample(out, channels[c][i], maxval);
    write_bytes(path, out);
}

void write_matrix(const ScalarField& field, const std::string& path) {
    std::string out = std::to_string(field.nx()) + " " + std::to_string(field.ny()) + "\n";
    char buf[40];
    for (int y = 0; y < field.ny(); ++y) {
        for (int x = 0; x < field.nx(); ++x) {
            std::snprintf(buf, sizeof(buf), "%.9g", field.at(x, y));
            if (x) out += ' ';
            out += buf;
        }
        out += '\n';
    }
    write_bytes(path, out);
}

ScalarField read_matrix(const std::string& path) {
    const std::string data = read_file_bytes(path);
    std::istringstream ss(data);
    int nx = 0, ny = 0;
    if (!(ss >> nx >> ny) || nx < 3 || ny < 3)
        throw IoError(IoErrorCode::MalformedHeader, path + ": expected 'nx ny' header");
    GridSpec spec{nx, ny, 1.0, 1.0};
    ScalarField out(spec);
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (!(ss >> out[i]))
            throw IoError(IoErrorCode::TruncatedPayload, path + ": fewer values than nx*ny");
    return out;
}

void export_curve_csv(const std::vector<std::pair<int, ClosedCurve>>& curves,
                      const std::string& path) {
    std::string out = "step,node,x,y\n";
    char buf[96];
    for (const auto& [step, curve] : curves) {
        for (std::size_t i = 0; i < curve.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%zu,%.9g,%.9g\n", step, i, curve.point(i).x,
                          curve.point(i).y);
            out += buf;
        }
    }
    write_bytes(path, out);
}

std::string file_fnv64(const std::string& path) {
    const std::string data = read_file_bytes(path);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace varflow
