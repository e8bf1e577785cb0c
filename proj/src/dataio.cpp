#include "vibtrack/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "vibtrack/errors.hpp"

namespace fs = std::filesystem;

namespace vibtrack {

namespace {

constexpr char kMaskMagic[4] = {'N', 'M', 'K', '1'};

std::string frame_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", i);
  return buf;
}

std::string mask_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mask_%06d.bin", i);
  return buf;
}

}  // namespace

const char* split_name(SplitKind s) {
  switch (s) {
    case SplitKind::Train: return "train";
    case SplitKind::Val: return "val";
    default: return "test";
  }
}

void write_pgm(const std::string& path, const GridD& pixels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << "P5\n" << pixels.cols << " " << pixels.rows << "\n255\n";
  std::vector<unsigned char> row(pixels.cols);
  for (int r = 0; r < pixels.rows; ++r) {
    for (int c = 0; c < pixels.cols; ++c) {
      const double v = std::clamp(pixels.at(r, c), 0.0, 1.0);
      row[c] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    os.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

GridD read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255)
    throw DataError("unsupported PGM header in " + path);
  is.get();  // single whitespace after maxval
  GridD g(h, w);
  std::vector<unsigned char> row(w);
  for (int r = 0; r < h; ++r) {
    is.read(reinterpret_cast<char*>(row.data()), row.size());
    if (!is) throw DataError("truncated PGM " + path);
    for (int c = 0; c < w; ++c) g.at(r, c) = row[c] / 255.0;
  }
  return g;
}

void write_packed_mask(const std::string& path, const Mask& mask) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.write(kMaskMagic, 4);
  const std::uint32_t rows = mask.rows, cols = mask.cols;
  os.write(reinterpret_cast<const char*>(&rows), 4);
  os.write(reinterpret_cast<const char*>(&cols), 4);
  const std::size_t nbits = mask.size();
  std::vector<unsigned char> packed((nbits + 7) / 8, 0);
  for (std::size_t i = 0; i < nbits; ++i)
    if (mask.data[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
  os.write(reinterpret_cast<const char*>(packed.data()), packed.size());
}

Mask read_packed_mask(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  char magic[4];
  std::uint32_t rows = 0, cols = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&rows), 4);
  is.read(reinterpret_cast<char*>(&cols), 4);
  if (!is || std::memcmp(magic, kMaskMagic, 4) != 0)
    throw DataError("bad mask header in " + path);
  Mask m(static_cast<int>(rows), static_cast<int>(cols), 0);
  const std::size_t nbits = m.size();
  std::vector<unsigned char> packed((nbits + 7) / 8);
  is.read(reinterpret_cast<char*>(packed.data()), packed.size());
  if (!is) throw DataError("truncated mask " + path);
  for (std::size_t i = 0; i < nbits; ++i)
    m.data[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return m;
}

void write_video(const std::string& dir, const Video& video, double angle_deg) {
  if (video.frames.empty()) throw DataError("empty video");
  fs::create_directories(dir);
  const auto& f0 = video.frames.front();
  {
    std::ofstream os(dir + "/meta");
    if (!os) throw DataError("cannot write meta in " + dir);
    os << "version=1\n"
       << "width=" << f0.pixels.cols << "\n"
       << "height=" << f0.pixels.rows << "\n"
       << "frames=" << video.frames.size() << "\n"
       << "fs=" << video.fs << "\n"
       << "spacing_row_mm=" << f0.spacing.row_mm << "\n"
       << "spacing_col_mm=" << f0.spacing.col_mm << "\n"
       << "angle_deg=" << angle_deg << "\n";
  }
  for (std::size_t i = 0; i < video.frames.size(); ++i)
    write_pgm(dir + "/" + frame_name(static_cast<int>(i)),
              video.frames[i].pixels);
  std::ofstream tips(dir + "/tips.csv");
  tips << "# frame,tip_row_px,tip_col_px,angle_deg\n";
  for (std::size_t i = 0; i < video.gt.size(); ++i) {
    write_packed_mask(dir + "/" + mask_name(static_cast<int>(i)),
                      video.gt[i].mask);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g\n", i, video.gt[i].tip.r,
                  video.gt[i].tip.c, video.gt[i].angle_deg);
    tips << buf;
  }
}

static std::map<std::string, std::string> read_meta(const std::string& dir) {
  std::ifstream is(dir + "/meta");
  if (!is) throw DataError("cannot open meta in " + dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double read_video_angle(const std::string& dir) {
  return std::stod(read_meta(dir).at("angle_deg"));
}

Video read_video(const std::string& dir) {
  const auto kv = read_meta(dir);
  const int n = std::stoi(kv.at("frames"));
  Video video;
  video.fs = std::stod(kv.at("fs"));
  Spacing spacing{std::stod(kv.at("spacing_row_mm")),
                  std::stod(kv.at("spacing_col_mm"))};
  const double angle = std::stod(kv.at("angle_deg"));

  std::map<long, std::pair<PointD, double>> tip_by_frame;
  std::ifstream tips(dir + "/tips.csv");
  if (tips) {
    std::string line;
    while (std::getline(tips, line)) {
      if (line.empty() || line[0] == '#') continue;
      long idx;
      PointD t;
      double a;
      if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf", &idx, &t.r, &t.c, &a) == 4)
        tip_by_frame[idx] = {t, a};
    }
  }

  for (int i = 0; i < n; ++i) {
    Frame f;
    f.pixels = read_pgm(dir + "/" + frame_name(i));
    f.timestamp = i / video.fs;
    f.spacing = spacing;
    video.frames.push_back(std::move(f));
    GroundTruth gt;
    const std::string mpath = dir + "/" + mask_name(i);
    if (fs::exists(mpath)) gt.mask = read_packed_mask(mpath);
    gt.angle_deg = angle;
    if (auto it = tip_by_frame.find(i); it != tip_by_frame.end()) {
      gt.tip = it->second.first;
      gt.angle_deg = it->second.second;
    }
    video.gt.push_back(std::move(gt));
  }
  return video;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << "version=1\n"
     << "fs=" << m.fs << "\n"
     << "spacing_row_mm=" << m.spacing.row_mm << "\n"
     << "spacing_col_mm=" << m.spacing.col_mm << "\n"
     << "window_len=" << m.window_len << "\n"
     << "videos=" << m.videos.size() << "\n";
  for (const auto& v : m.videos)
    os << v.id << "," << v.angle_deg << "," << v.frame_count << "," << v.path
       << "," << split_name(v.split) << "\n";
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest " + path);
  DatasetManifest m;
  std::string line;
  int expected = 0;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && line.find(',') == std::string::npos) {
      const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      if (key == "fs") m.fs = std::stod(val);
      else if (key == "spacing_row_mm") m.spacing.row_mm = std::stod(val);
      else if (key == "spacing_col_mm") m.spacing.col_mm = std::stod(val);
      else if (key == "window_len") m.window_len = std::stoi(val);
      else if (key == "videos") expected = std::stoi(val);
      continue;
    }
    std::stringstream ss(line);
    std::string id, angle, count, vpath, split_str;
    if (std::getline(ss, id, ',') && std::getline(ss, angle, ',') &&
        std::getline(ss, count, ',') && std::getline(ss, vpath, ',') &&
        std::getline(ss, split_str)) {
      VideoMeta v;
      v.id = id;
      v.angle_deg = std::stod(angle);
      v.frame_count = std::stoi(count);
      v.path = vpath;
      v.split = split_str == "train"  ? SplitKind::Train
                : split_str == "val" ? SplitKind::Val
                                     : SplitKind::Test;
      m.videos.push_back(std::move(v));
    }
  }
  if (expected && expected != static_cast<int>(m.videos.size()))
    throw DataError("manifest video count mismatch in " + path);
  return m;
}

std::array<int, 3> split_counts(int n, const std::array<double, 3>& fractions) {
  std::array<int, 3> counts{};
  std::array<double, 3> rem{};
  int used = 0;
  for (int i = 0; i < 3; ++i) {
    const double q = n * fractions[i];
    counts[i] = static_cast<int>(std::floor(q));
    rem[i] = q - counts[i];
    used += counts[i];
  }
  // Leftover seats go to the smallest allocations first (ties: larger
  // remainder), protecting the minority val/test splits.
  for (int left = n - used; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (counts[i] < counts[best] ||
          (counts[i] == counts[best] && rem[i] > rem[best]))
        best = i;
    ++counts[best];
  }
  // Every split gets at least one video when possible.
  if (n >= 3)
    for (int i = 0; i < 3; ++i)
      while (counts[i] == 0) {
        int big = 0;
        for (int j = 1; j < 3; ++j)
          if (counts[j] > counts[big]) big = j;
        --counts[big];
        ++counts[i];
      }
  return counts;
}

DatasetManifest split(std::vector<VideoMeta> videos,
                      const std::array<double, 3>& fractions, std::uint64_t seed,
                      bool stratify_by_angle) {
  const double fsum = fractions[0] + fractions[1] + fractions[2];
  if (fractions[0] <= 0 || fractions[1] <= 0 || fractions[2] <= 0 ||
      std::fabs(fsum - 1.0) > 1e-9)
    throw DataError("split fractions must be positive and sum to 1");

  std::sort(videos.begin(), videos.end(),
            [](const VideoMeta& a, const VideoMeta& b) { return a.id < b.id; });

  std::map<long long, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const long long key =
        stratify_by_angle ? std::llround(videos[i].angle_deg * 1000.0) : 0;
    strata[key].push_back(i);
  }

  std::mt19937_64 rng(seed);
  for (auto& [key, idx] : strata) {
    (void)key;
    if (idx.size() < 3)
      throw TooFewVideos("each stratum needs at least 3 videos");
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto counts = split_counts(static_cast<int>(idx.size()), fractions);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s)
      for (int j = 0; j < counts[s]; ++j)
        videos[idx[pos++]].split = static_cast<SplitKind>(s);
  }

  DatasetManifest m;
  m.videos = std::move(videos);
  return m;
}

int count_sequences(int frame_count, int window_len, int stride) {
  if (frame_count < window_len)
    throw VideoTooShort("video shorter than one window");
  return (frame_count - window_len) / stride + 1;
}

AugmentOps sample_augment(std::mt19937_64& rng, const AugmentRanges& ranges) {
  AugmentOps ops;
  ops.hflip = std::uniform_int_distribution<int>(0, 1)(rng) != 0;
  ops.contrast = std::uniform_real_distribution<double>(ranges.contrast_lo,
                                                        ranges.contrast_hi)(rng);
  ops.brightness = std::uniform_real_distribution<double>(
      ranges.brightness_lo, ranges.brightness_hi)(rng);
  return ops;
}

void augment_window(std::vector<GridD>& frames, std::vector<Mask>& masks,
                    double& angle_deg, const AugmentOps& ops) {
  if (ops.contrast <= 0.0) throw DataError("contrast factor must be positive");
  for (auto& f : frames) {
    if (ops.hflip)
      for (int r = 0; r < f.rows; ++r)
        for (int c = 0; c < f.cols / 2; ++c)
          std::swap(f.at(r, c), f.at(r, f.cols - 1 - c));
    if (ops.contrast != 1.0)
      for (auto& p : f.data)
        p = std::clamp(0.5 + (p - 0.5) * ops.contrast, 0.0, 1.0);
    if (ops.brightness != 0.0)
      for (auto& p : f.data) p = std::clamp(p + ops.brightness, 0.0, 1.0);
  }
  if (ops.hflip) {
    for (auto& m : masks)
      for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols / 2; ++c)
          std::swap(m.at(r, c), m.at(r, m.cols - 1 - c));
    angle_deg = -angle_deg;
  }
}

}  // namespace vibtrack
