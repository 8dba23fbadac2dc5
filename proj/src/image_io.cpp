#include "wavecs/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "wavecs/error.hpp"

namespace wavecs {
namespace fs = std::filesystem;
namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& is) {
  std::string tok;
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = is.get();
  }
  return tok;
}

int parse_int(const std::string& tok, const fs::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed header field '" + tok + "'");
  }
}

}  // namespace

Frame read_image(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  const std::string magic = next_token(is);
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw DataError(path.string() + ": unsupported image format (expected PGM/PPM)");
  }
  const int w = parse_int(next_token(is), path);
  const int h = parse_int(next_token(is), path);
  const int maxval = parse_int(next_token(is), path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw DataError(path.string() + ": bad header");
  const bool color = magic == "P3" || magic == "P6";
  const bool ascii = magic == "P2" || magic == "P3";
  const int channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;

  std::vector<double> raw(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string tok = next_token(is);
      if (tok.empty()) throw DataError(path.string() + ": truncated pixel data");
      raw[i] = parse_int(tok, path);
    }
  } else {
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(count * bytes);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw DataError(path.string() + ": truncated pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      raw[i] = bytes == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
    }
  }

  Plane p(w, h);
  const double scale = 1.0 / maxval;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (color) {
      p.data[i] = (kLumaR * raw[3 * i] + kLumaG * raw[3 * i + 1] + kLumaB * raw[3 * i + 2]) * scale;
    } else {
      p.data[i] = raw[i] * scale;
    }
  }
  return Frame::from_plane(std::move(p));
}

void write_image(const Frame& frame, const fs::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw UsageError("bit depth must be 8 or 16");
  if (frame.empty()) throw DataError("write_image: empty frame");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  const int maxval = bit_depth == 8 ? 255 : 65535;
  os << "P5\n" << frame.width() << ' ' << frame.height() << '\n' << maxval << '\n';
  const auto px = frame.pixels();
  std::vector<unsigned char> buf(px.size() * (bit_depth / 8));
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto q = static_cast<unsigned>(std::lround(px[i] * maxval));
    if (bit_depth == 8) {
      buf[i] = static_cast<unsigned char>(q);
    } else {
      buf[2 * i] = static_cast<unsigned char>(q >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw DataError("write failed: " + path.string());
}

void write_color_image(const Plane& r, const Plane& g, const Plane& b, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << "P6\n" << r.width << ' ' << r.height << "\n255\n";
  std::vector<unsigned char> buf(r.size() * 3);
  for (std::size_t i = 0; i < r.size(); ++i) {
    buf[3 * i] = static_cast<unsigned char>(std::lround(std::clamp(r.data[i], 0.0, 1.0) * 255));
    buf[3 * i + 1] = static_cast<unsigned char>(std::lround(std::clamp(g.data[i], 0.0, 1.0) * 255));
    buf[3 * i + 2] = static_cast<unsigned char>(std::lround(std::clamp(b.data[i], 0.0, 1.0) * 255));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

fs::path frame_path(const fs::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%05zu.pgm", index);
  return dir / name;
}

void save_sequence(const Video& video, const fs::path& dir, int bit_depth) {
  check_video(video, 1);
  fs::create_directories(dir);
  for (std::size_t t = 0; t < video.size(); ++t) write_image(video.frames[t], frame_path(dir, t), bit_depth);
  std::ofstream os(dir / "manifest.txt");
  if (!os) throw DataError("cannot write manifest in " + dir.string());
  os << "# wavecs frame sequence\n"
     << "fps=" << video.fps << '\n'
     << "count=" << video.size() << '\n'
     << "bit_depth=" << bit_depth << '\n';
}

Video load_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  Video video;
  std::size_t count = 0;
  bool have_count = false;

  if (std::ifstream ms(dir / "manifest.txt"); ms) {
    std::string line;
    while (std::getline(ms, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      try {
        if (key == "fps") video.fps = std::stod(value);
        if (key == "count") {
          count = std::stoul(value);
          have_count = true;
        }
      } catch (const std::exception&) {
        throw DataError(dir.string() + "/manifest.txt: bad value for " + key);
      }
    }
  }

  if (!have_count) {
    // No manifest: the frames must be numbered contiguously from zero.
    static const std::regex pattern(R"(frame_(\d+)\.p[gp]m)");
    std::vector<std::size_t> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (std::regex_match(name, m, pattern)) found.push_back(std::stoul(m[1].str()));
    }
    std::sort(found.begin(), found.end());
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (found[i] != i) throw DataError(dir.string() + ": missing frame " + std::to_string(i));
    }
    count = found.size();
  }
  if (count == 0) throw DataError(dir.string() + ": no frames");

  video.frames.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    fs::path p = frame_path(dir, t);
    if (!fs::exists(p)) {
      fs::path alt = p;
      alt.replace_extension(".ppm");
      if (!fs::exists(alt)) throw DataError(dir.string() + ": missing frame " + std::to_string(t));
      p = alt;
    }
    try {
      video.frames.push_back(read_image(p));
    } catch (const DataError& e) {
      throw DataError("frame " + std::to_string(t) + ": " + e.what());
    }
  }
  check_video(video, 1);
  return video;
}

}  // namespace wavecs
