#include "lineval/data_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "lineval/errors.hpp"

namespace lineval {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string loc(const std::string& path, std::size_t row) {
  return path + ":" + std::to_string(row);
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Rows of whitespace-separated tokens; blank lines and '#' comments skipped.
// Row numbers are 1-based positions in the file, kept for diagnostics.
struct TextRow {
  std::size_t number;
  std::vector<std::string> tokens;
};

std::vector<TextRow> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::vector<TextRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) {
      if (tok[0] == '#') break;
      tokens.push_back(tok);
    }
    if (!tokens.empty()) rows.push_back({number, std::move(tokens)});
  }
  return rows;
}

std::int64_t parse_int(const std::string& tok, const std::string& path,
                       std::size_t row, const char* field) {
  std::int64_t value = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw InputError(loc(path, row) + ": expected integer for " + field +
                     ", got '" + tok + "'");
  return value;
}

double parse_double(const std::string& tok, const std::string& path,
                    std::size_t row, const char* field) {
  double value = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw InputError(loc(path, row) + ": expected number for " + field +
                     ", got '" + tok + "'");
  if (!std::isfinite(value))
    throw InputError(loc(path, row) + ": non-finite value for " + field);
  return value;
}

const json& require_field(const json& obj, const char* key,
                          const std::string& ctx, const std::string& path) {
  if (!obj.is_object())
    throw InputError(path + ": " + ctx + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw InputError(path + ": " + ctx + " is missing field '" + key + "'");
  return *it;
}

std::int64_t require_int(const json& obj, const char* key,
                         const std::string& ctx, const std::string& path) {
  const json& v = require_field(obj, key, ctx, path);
  if (!v.is_number_integer())
    throw InputError(path + ": " + ctx + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

double require_number(const json& obj, const char* key, const std::string& ctx,
                      const std::string& path) {
  const json& v = require_field(obj, key, ctx, path);
  if (!v.is_number())
    throw InputError(path + ": " + ctx + "." + key + " must be a number");
  return v.get<double>();
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InputError(path + ": cannot open for writing");
  return out;
}

}  // namespace

const Frame* SequenceAnnotation::find(std::int64_t frame_id) const {
  for (const Frame& f : frames)
    if (f.frame_id == frame_id) return &f;
  return nullptr;
}

const Frame* DetectionSet::find(std::int64_t frame_id) const {
  for (const Frame& f : frames)
    if (f.frame_id == frame_id) return &f;
  return nullptr;
}

const PairMatches* MatchFile::find(std::int64_t frame_i,
                                   std::int64_t frame_j) const {
  for (const PairMatches& p : pairs)
    if (p.frame_i == frame_i && p.frame_j == frame_j) return &p;
  return nullptr;
}

SequenceAnnotation load_annotations(const std::string& path) {
  const json doc = parse_json_file(path);
  const json& frames = require_field(doc, "frames", "document root", path);
  if (!frames.is_array())
    throw InputError(path + ": 'frames' must be an array");

  SequenceAnnotation out;
  out.frames.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string ctx = "frames[" + std::to_string(i) + "]";
    const json& jf = frames[i];
    Frame frame;
    frame.frame_id = require_int(jf, "frame_id", ctx, path);
    if (!out.frames.empty() && frame.frame_id <= out.frames.back().frame_id)
      throw InputError(path + ": " + ctx + ": frame_id " +
                       std::to_string(frame.frame_id) +
                       " not greater than previous " +
                       std::to_string(out.frames.back().frame_id));
    const json& jlines = require_field(jf, "lines", ctx, path);
    if (!jlines.is_array())
      throw InputError(path + ": " + ctx + ".lines must be an array");

    std::unordered_set<std::int64_t> seen_tracks;
    frame.lines.reserve(jlines.size());
    for (std::size_t k = 0; k < jlines.size(); ++k) {
      const std::string lctx = ctx + ".lines[" + std::to_string(k) + "]";
      const json& jl = jlines[k];
      const std::int64_t track = require_int(jl, "track_id", lctx, path);
      if (track < std::numeric_limits<int>::min() ||
          track > std::numeric_limits<int>::max())
        throw InputError(path + ": " + lctx + ".track_id out of range");
      if (!seen_tracks.insert(track).second)
        throw InputError(path + ": " + ctx + " (frame_id " +
                         std::to_string(frame.frame_id) +
                         "): duplicate track_id " + std::to_string(track));
      const double x1 = require_number(jl, "x1", lctx, path);
      const double y1 = require_number(jl, "y1", lctx, path);
      const double x2 = require_number(jl, "x2", lctx, path);
      const double y2 = require_number(jl, "y2", lctx, path);
      try {
        frame.lines.emplace_back(Vec2(x1, y1), Vec2(x2, y2), std::nullopt,
                                 static_cast<int>(track));
      } catch (const InputError& e) {
        throw InputError(path + ": " + lctx + ": " + e.what());
      }
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

SequenceStats sequence_stats(const SequenceAnnotation& a) {
  SequenceStats s;
  s.n_frames = static_cast<std::int64_t>(a.frames.size());
  std::unordered_set<int> tracks;
  std::int64_t total_lines = 0;
  for (const Frame& f : a.frames) {
    total_lines += static_cast<std::int64_t>(f.lines.size());
    for (const LineSegment2D& l : f.lines)
      if (l.track_id) tracks.insert(*l.track_id);
  }
  s.n_tracks = static_cast<std::int64_t>(tracks.size());
  s.mean_lines_per_frame =
      s.n_frames == 0 ? 0.0
                      : static_cast<double>(total_lines) /
                            static_cast<double>(s.n_frames);
  return s;
}

DetectionSet load_detections(const std::string& path) {
  DetectionSet out;
  std::unordered_map<std::int64_t, std::size_t> index;
  bool first = true;
  for (const TextRow& row : read_rows(path)) {
    if (row.tokens.size() != 5 && row.tokens.size() != 6)
      throw InputError(loc(path, row.number) +
                       ": expected 'frame_id x1 y1 x2 y2 [score]', got " +
                       std::to_string(row.tokens.size()) + " columns");
    const bool scored = row.tokens.size() == 6;
    if (first) {
      out.scored = scored;
      first = false;
    } else if (scored != out.scored) {
      throw InputError(loc(path, row.number) +
                       ": mixed scored and unscored rows");
    }
    const std::int64_t frame_id =
        parse_int(row.tokens[0], path, row.number, "frame_id");
    const double x1 = parse_double(row.tokens[1], path, row.number, "x1");
    const double y1 = parse_double(row.tokens[2], path, row.number, "y1");
    const double x2 = parse_double(row.tokens[3], path, row.number, "x2");
    const double y2 = parse_double(row.tokens[4], path, row.number, "y2");
    std::optional<double> score;
    if (scored) score = parse_double(row.tokens[5], path, row.number, "score");

    auto [it, inserted] = index.try_emplace(frame_id, out.frames.size());
    if (inserted) out.frames.push_back({frame_id, {}});
    try {
      out.frames[it->second].lines.emplace_back(Vec2(x1, y1), Vec2(x2, y2),
                                                score);
    } catch (const InputError& e) {
      throw InputError(loc(path, row.number) + ": " + e.what());
    }
  }
  return out;
}

MatchFile load_matches(const std::string& path) {
  struct RawPair {
    std::int64_t frame_i, frame_j;
    std::vector<std::pair<int, int>> pairs;
  };
  std::vector<RawPair> raw;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> index;
  for (const TextRow& row : read_rows(path)) {
    if (row.tokens.size() != 4)
      throw InputError(loc(path, row.number) +
                       ": expected 'frame_i frame_j idx_i idx_j', got " +
                       std::to_string(row.tokens.size()) + " columns");
    const std::int64_t fi = parse_int(row.tokens[0], path, row.number, "frame_i");
    const std::int64_t fj = parse_int(row.tokens[1], path, row.number, "frame_j");
    const std::int64_t ii = parse_int(row.tokens[2], path, row.number, "idx_i");
    const std::int64_t jj = parse_int(row.tokens[3], path, row.number, "idx_j");
    if (ii < 0 || jj < 0)
      throw InputError(loc(path, row.number) + ": negative segment index");
    if (ii > std::numeric_limits<int>::max() ||
        jj > std::numeric_limits<int>::max())
      throw InputError(loc(path, row.number) + ": segment index out of range");
    auto [it, inserted] = index.try_emplace({fi, fj}, raw.size());
    if (inserted) raw.push_back({fi, fj, {}});
    raw[it->second].pairs.emplace_back(static_cast<int>(ii),
                                       static_cast<int>(jj));
  }

  MatchFile out;
  out.pairs.reserve(raw.size());
  for (RawPair& r : raw) {
    try {
      out.pairs.push_back({r.frame_i, r.frame_j, MatchSet(std::move(r.pairs))});
    } catch (const InputError& e) {
      throw InputError(path + ": frame pair (" + std::to_string(r.frame_i) +
                       ", " + std::to_string(r.frame_j) + "): " + e.what());
    }
  }
  return out;
}

namespace {

DepthImage read_depth_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw InputError(path + ": cannot open file");

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw ComputeError("libpng initialization failed");
  }

  DepthImage img;
  std::vector<png_bytep> row_ptrs;
  // libpng reports failures through longjmp; convert to an exception only
  // after tearing the structs down.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw InputError(path + ": corrupt PNG stream");
  }

  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw InputError(path + ": expected 16-bit single-channel image, got " +
                     std::to_string(bit_depth) + "-bit color type " +
                     std::to_string(color_type));
  }
  if constexpr (std::endian::native == std::endian::little) png_set_swap(png);

  img = DepthImage(static_cast<int>(w), static_cast<int>(h));
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y)
    row_ptrs[y] =
        reinterpret_cast<png_bytep>(&img.values[std::size_t(y) * w]);
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

DepthImage read_depth_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");

  // Header tokens may be separated by whitespace and '#' comments.
  auto next_token = [&]() -> std::string {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw InputError(path + ": truncated PGM header");
    return tok;
  };

  const std::string magic = next_token();
  if (magic != "P5")
    throw InputError(path + ": expected binary PGM (P5), got '" + magic + "'");
  const std::string ws = next_token();
  const std::string hs = next_token();
  const std::string ms = next_token();
  const std::int64_t w = parse_int(ws, path, 1, "width");
  const std::int64_t h = parse_int(hs, path, 1, "height");
  const std::int64_t maxval = parse_int(ms, path, 1, "maxval");
  if (w <= 0 || h <= 0) throw InputError(path + ": non-positive PGM size");
  if (maxval != 65535)
    throw InputError(path + ": expected 16-bit single-channel image (maxval "
                     "65535), got maxval " + std::to_string(maxval));

  DepthImage img(static_cast<int>(w), static_cast<int>(h));
  std::vector<unsigned char> bytes(std::size_t(w) * h * 2);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw InputError(path + ": truncated PGM pixel data");
  for (std::size_t i = 0; i < img.values.size(); ++i)
    img.values[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) |
                                               bytes[2 * i + 1]);
  return img;
}

}  // namespace

DepthImage load_depth(const std::string& path, const CameraModel& cam) {
  unsigned char magic[2] = {0, 0};
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw InputError(path + ": cannot open file");
    probe.read(reinterpret_cast<char*>(magic), 2);
  }

  DepthImage img;
  if (magic[0] == 0x89 && magic[1] == 'P')
    img = read_depth_png(path);
  else if (magic[0] == 'P' && magic[1] == '5')
    img = read_depth_pgm(path);
  else
    throw InputError(path + ": not a PNG or binary PGM file");

  if (img.width != cam.width || img.height != cam.height)
    throw InputError(path + ": depth image " + std::to_string(img.width) +
                     "x" + std::to_string(img.height) +
                     " does not match camera " + std::to_string(cam.width) +
                     "x" + std::to_string(cam.height));
  return img;
}

TrajectoryFile::TrajectoryFile(std::vector<Record> records)
    : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    if (i > 0 && r.timestamp <= records_[i - 1].timestamp)
      throw InputError("trajectory timestamps not strictly increasing at "
                       "record " + std::to_string(i));
    if (std::abs(r.rotation.norm() - 1.0) > 1e-6)
      throw InputError("non-unit quaternion at record " + std::to_string(i));
  }
}

void TrajectoryFile::set_frame_map(
    std::vector<std::pair<std::int64_t, double>> frame_to_time) {
  std::sort(frame_to_time.begin(), frame_to_time.end());
  for (std::size_t i = 1; i < frame_to_time.size(); ++i)
    if (frame_to_time[i].first == frame_to_time[i - 1].first)
      throw InputError("duplicate frame id " +
                       std::to_string(frame_to_time[i].first) +
                       " in frame map");
  frame_map_ = std::move(frame_to_time);
}

PoseSE3 TrajectoryFile::pose_for_frame(std::int64_t frame_id) const {
  const Record* rec = nullptr;
  if (frame_map_.empty()) {
    if (frame_id < 0 || frame_id >= static_cast<std::int64_t>(records_.size()))
      throw InputError("unknown frame id " + std::to_string(frame_id) +
                       ": trajectory has " + std::to_string(records_.size()) +
                       " records");
    rec = &records_[static_cast<std::size_t>(frame_id)];
  } else {
    auto it = std::lower_bound(
        frame_map_.begin(), frame_map_.end(), frame_id,
        [](const auto& entry, std::int64_t id) { return entry.first < id; });
    if (it == frame_map_.end() || it->first != frame_id)
      throw InputError("unknown frame id " + std::to_string(frame_id) +
                       " in frame map");
    const double t = it->second;
    auto rit = std::lower_bound(
        records_.begin(), records_.end(), t,
        [](const Record& r, double ts) { return r.timestamp < ts; });
    const Record* best = nullptr;
    double best_dt = std::numeric_limits<double>::infinity();
    if (rit != records_.end() && std::abs(rit->timestamp - t) < best_dt) {
      best = &*rit;
      best_dt = std::abs(rit->timestamp - t);
    }
    if (rit != records_.begin()) {
      auto prev = std::prev(rit);
      if (std::abs(prev->timestamp - t) < best_dt) {
        best = &*prev;
        best_dt = std::abs(prev->timestamp - t);
      }
    }
    if (!best || best_dt > 1e-6)
      throw InputError("frame id " + std::to_string(frame_id) +
                       " maps to timestamp " + fmt(t) +
                       " absent from the trajectory");
    rec = best;
  }
  return PoseSE3(rec->rotation.normalized().toRotationMatrix(),
                 rec->translation);
}

PoseSE3 relative_gt(const TrajectoryFile& traj, std::int64_t frame_i,
                    std::int64_t frame_j) {
  return traj.pose_for_frame(frame_i).inverse().compose(
      traj.pose_for_frame(frame_j));
}

TrajectoryFile load_trajectory(const std::string& path) {
  std::vector<TrajectoryFile::Record> records;
  for (const TextRow& row : read_rows(path)) {
    if (row.tokens.size() != 8)
      throw InputError(loc(path, row.number) +
                       ": expected 'timestamp tx ty tz qx qy qz qw', got " +
                       std::to_string(row.tokens.size()) + " columns");
    TrajectoryFile::Record rec;
    rec.timestamp = parse_double(row.tokens[0], path, row.number, "timestamp");
    rec.translation =
        Vec3(parse_double(row.tokens[1], path, row.number, "tx"),
             parse_double(row.tokens[2], path, row.number, "ty"),
             parse_double(row.tokens[3], path, row.number, "tz"));
    const double qx = parse_double(row.tokens[4], path, row.number, "qx");
    const double qy = parse_double(row.tokens[5], path, row.number, "qy");
    const double qz = parse_double(row.tokens[6], path, row.number, "qz");
    const double qw = parse_double(row.tokens[7], path, row.number, "qw");
    rec.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    if (std::abs(rec.rotation.norm() - 1.0) > 1e-6)
      throw InputError(loc(path, row.number) + ": non-unit quaternion (norm " +
                       fmt(rec.rotation.norm()) + ")");
    if (!records.empty() && rec.timestamp <= records.back().timestamp)
      throw InputError(loc(path, row.number) +
                       ": timestamps not strictly increasing");
    records.push_back(rec);
  }
  return TrajectoryFile(std::move(records));
}

std::vector<std::pair<std::int64_t, double>> load_frame_map(
    const std::string& path) {
  std::vector<std::pair<std::int64_t, double>> out;
  for (const TextRow& row : read_rows(path)) {
    if (row.tokens.size() != 2)
      throw InputError(loc(path, row.number) +
                       ": expected 'frame_id timestamp'");
    out.emplace_back(parse_int(row.tokens[0], path, row.number, "frame_id"),
                     parse_double(row.tokens[1], path, row.number,
                                  "timestamp"));
  }
  return out;
}

std::vector<TimingRecord> load_timings(const std::string& path) {
  std::vector<TimingRecord> out;
  for (const TextRow& row : read_rows(path)) {
    if (row.tokens.size() != 2)
      throw InputError(loc(path, row.number) +
                       ": expected 'frame_id seconds'");
    TimingRecord rec;
    rec.frame_id = parse_int(row.tokens[0], path, row.number, "frame_id");
    rec.seconds = parse_double(row.tokens[1], path, row.number, "seconds");
    if (rec.seconds <= 0)
      throw InputError(loc(path, row.number) + ": non-positive duration " +
                       fmt(rec.seconds));
    out.push_back(rec);
  }
  return out;
}

double fps(const std::vector<TimingRecord>& timings) {
  if (timings.empty()) throw InputError("no timing rows");
  double total = 0;
  for (const TimingRecord& t : timings) {
    if (t.seconds <= 0)
      throw InputError("non-positive duration for frame " +
                       std::to_string(t.frame_id));
    total += t.seconds;
  }
  return static_cast<double>(timings.size()) / total;
}

CameraModel load_camera(const std::string& path) {
  const json doc = parse_json_file(path);
  const double fx = require_number(doc, "fx", "intrinsics", path);
  const double fy = require_number(doc, "fy", "intrinsics", path);
  const double cx = require_number(doc, "cx", "intrinsics", path);
  const double cy = require_number(doc, "cy", "intrinsics", path);
  const std::int64_t width = require_int(doc, "width", "intrinsics", path);
  const std::int64_t height = require_int(doc, "height", "intrinsics", path);
  double depth_scale = 5000.0;
  if (doc.contains("depth_scale")) {
    if (!doc["depth_scale"].is_number())
      throw InputError(path + ": intrinsics.depth_scale must be a number");
    depth_scale = doc["depth_scale"].get<double>();
  }
  try {
    return CameraModel(fx, fy, cx, cy, depth_scale, static_cast<int>(width),
                       static_cast<int>(height));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_annotations(const SequenceAnnotation& a, const std::string& path) {
  ordered_json doc;
  doc["frames"] = ordered_json::array();
  for (const Frame& f : a.frames) {
    ordered_json jf;
    jf["frame_id"] = f.frame_id;
    jf["lines"] = ordered_json::array();
    for (const LineSegment2D& l : f.lines) {
      if (!l.track_id)
        throw InputError("annotation line in frame " +
                         std::to_string(f.frame_id) + " is missing a track id");
      ordered_json jl;
      jl["track_id"] = *l.track_id;
      jl["x1"] = l.p1[0];
      jl["y1"] = l.p1[1];
      jl["x2"] = l.p2[0];
      jl["y2"] = l.p2[1];
      jf["lines"].push_back(std::move(jl));
    }
    doc["frames"].push_back(std::move(jf));
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_detections(const DetectionSet& d, const std::string& path) {
  auto out = open_out(path);
  for (const Frame& f : d.frames) {
    for (const LineSegment2D& l : f.lines) {
      if (d.scored != l.score.has_value())
        throw InputError("detection in frame " + std::to_string(f.frame_id) +
                         " disagrees with the set's scored flag");
      out << f.frame_id << ' ' << fmt(l.p1[0]) << ' ' << fmt(l.p1[1]) << ' '
          << fmt(l.p2[0]) << ' ' << fmt(l.p2[1]);
      if (l.score) out << ' ' << fmt(*l.score);
      out << '\n';
    }
  }
}

void write_matches(const MatchFile& m, const std::string& path) {
  auto out = open_out(path);
  for (const PairMatches& p : m.pairs)
    for (const auto& [i, j] : p.matches.pairs())
      out << p.frame_i << ' ' << p.frame_j << ' ' << i << ' ' << j << '\n';
}

void write_depth_png(const DepthImage& img, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw InputError(path + ": cannot open for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw ComputeError("libpng initialization failed");
  }
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw InputError(path + ": PNG write failed");
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if constexpr (std::endian::native == std::endian::little) png_set_swap(png);

  row_ptrs.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    row_ptrs[y] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(
        &img.values[std::size_t(y) * img.width]));
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_depth_pgm(const DepthImage& img, const std::string& path) {
  auto out = open_out(path, /*binary=*/true);
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(img.values.size() * 2);
  for (std::uint16_t v : img.values) {
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_trajectory(const TrajectoryFile& t, const std::string& path) {
  auto out = open_out(path);
  for (const TrajectoryFile::Record& r : t.records())
    out << fmt(r.timestamp) << ' ' << fmt(r.translation[0]) << ' '
        << fmt(r.translation[1]) << ' ' << fmt(r.translation[2]) << ' '
        << fmt(r.rotation.x()) << ' ' << fmt(r.rotation.y()) << ' '
        << fmt(r.rotation.z()) << ' ' << fmt(r.rotation.w()) << '\n';
}

void write_timings(const std::vector<TimingRecord>& t,
                   const std::string& path) {
  auto out = open_out(path);
  for (const TimingRecord& rec : t)
    out << rec.frame_id << ' ' << fmt(rec.seconds) << '\n';
}

void write_camera(const CameraModel& cam, const std::string& path) {
  ordered_json doc;
  doc["fx"] = cam.fx;
  doc["fy"] = cam.fy;
  doc["cx"] = cam.cx;
  doc["cy"] = cam.cy;
  doc["width"] = cam.width;
  doc["height"] = cam.height;
  doc["depth_scale"] = cam.depth_scale;
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace lineval
