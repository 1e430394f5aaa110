#include "partmatch/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "partmatch/errors.hpp"
#include "partmatch/log.hpp"

namespace partmatch {

namespace {

// Strips trailing carriage returns and surrounding whitespace.
std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Parses a `# key: value` header line; returns false if it is a plain comment.
bool parse_header(const std::string& line, std::string& key, std::string& value) {
    std::string body = trim(line.substr(1));
    const auto colon = body.find(':');
    if (colon == std::string::npos) {
        return false;
    }
    key = trim(body.substr(0, colon));
    value = trim(body.substr(colon + 1));
    return !key.empty();
}

double parse_double(const std::string& token, const std::filesystem::path& path,
                    std::size_t line_number) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &consumed);
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad number '" + token + "'", line_number);
    }
    if (consumed != token.size() || !std::isfinite(value)) {
        throw ParseError(path.string() + ": bad number '" + token + "'", line_number);
    }
    return value;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream stream(line);
    std::string token;
    while (stream >> token) {
        tokens.push_back(token);
    }
    return tokens;
}

}  // namespace

PointSetMap load_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open map file " + path.string(), 0);
    }
    std::string id = path.stem().string();
    std::vector<Point2> points;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        if (body[0] == '#') {
            std::string key, value;
            if (parse_header(body, key, value) && key == "id" && !value.empty()) {
                id = value;
            }
            continue;
        }
        const auto tokens = split_tokens(body);
        if (tokens.size() != 2) {
            throw ParseError(path.string() + ": expected 'x y'", line_number);
        }
        points.push_back(Point2{parse_double(tokens[0], path, line_number),
                                parse_double(tokens[1], path, line_number)});
    }
    if (points.empty()) {
        throw ParseError(path.string() + ": no points", line_number);
    }
    return make_point_set_map(id, std::move(points));
}

void save_map(const PointSetMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write map file " + path.string());
    }
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "# id: " << map.id << "\n";
    for (const Point2& p : map.points) {
        out << p.x << " " << p.y << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed while writing map file " + path.string());
    }
}

std::vector<TrajectoryPoint> load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open trajectory file " + path.string(), 0);
    }
    std::vector<TrajectoryPoint> trajectory;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') {
            continue;
        }
        const auto tokens = split_tokens(body);
        if (tokens.size() != 3) {
            throw ParseError(path.string() + ": expected 'x y travel'", line_number);
        }
        TrajectoryPoint sample;
        sample.position.x = parse_double(tokens[0], path, line_number);
        sample.position.y = parse_double(tokens[1], path, line_number);
        sample.travel = parse_double(tokens[2], path, line_number);
        if (!trajectory.empty() && sample.travel < trajectory.back().travel) {
            throw ParseError(path.string() + ": travel must be nondecreasing", line_number);
        }
        trajectory.push_back(sample);
    }
    if (trajectory.empty()) {
        throw ParseError(path.string() + ": no samples", line_number);
    }
    return trajectory;
}

void save_trajectory(const std::vector<TrajectoryPoint>& trajectory,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write trajectory file " + path.string());
    }
    char buffer[96];
    for (const TrajectoryPoint& sample : trajectory) {
        std::snprintf(buffer, sizeof(buffer), "%.3f %.3f %.3f\n", sample.position.x,
                      sample.position.y, sample.travel);
        out << buffer;
    }
    if (!out) {
        throw std::runtime_error("failed while writing trajectory file " + path.string());
    }
}

std::vector<PointSetMap> load_collection(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".map") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<PointSetMap> maps;
    maps.reserve(files.size());
    for (const auto& file : files) {
        maps.push_back(load_map(file));
    }
    return maps;
}

namespace {

constexpr double kEntropyBin = 0.1;

// Shannon entropy (bits) of the 0.1 m histogram of one coordinate axis.
double axis_entropy(const std::vector<double>& values) {
    std::unordered_map<long long, std::size_t> bins;
    bins.reserve(values.size());
    for (double v : values) {
        ++bins[static_cast<long long>(std::floor(v / kEntropyBin))];
    }
    const double total = static_cast<double>(values.size());
    double entropy = 0.0;
    for (const auto& [bin, count] : bins) {
        const double p = static_cast<double>(count) / total;
        entropy -= p * std::log2(p);
    }
    return entropy;
}

double alignment_entropy(std::span<const Point2> points, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    std::vector<double> xs(points.size());
    std::vector<double> ys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        xs[i] = c * points[i].x - s * points[i].y;
        ys[i] = s * points[i].x + c * points[i].y;
    }
    return axis_entropy(xs) + axis_entropy(ys);
}

ManhattanAlignment align_manhattan_impl(std::vector<Point2>& points, double angle_step,
                                         bool parallel) {
    if (points.empty()) {
        throw std::invalid_argument("align_manhattan: empty point set");
    }
    if (angle_step <= 0.0 || angle_step > 0.017453292519943295) {
        throw std::invalid_argument("align_manhattan: angle_step must be in (0, pi/180]");
    }
    constexpr double half_pi = 1.5707963267948966;
    std::vector<double> angles;
    for (double a = 0.0; a < half_pi; a += angle_step) {
        angles.push_back(a);
    }
    std::vector<double> entropies(angles.size(), 0.0);
    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long i = 0; i < static_cast<long long>(angles.size()); ++i) {
            entropies[static_cast<std::size_t>(i)] =
                alignment_entropy(points, angles[static_cast<std::size_t>(i)]);
        }
    } else {
        for (std::size_t i = 0; i < angles.size(); ++i) {
            entropies[i] = alignment_entropy(points, angles[i]);
        }
    }
    // Serial argmin; ties resolve to the smallest angle.
    std::size_t best = 0;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        if (entropies[i] < entropies[best]) {
            best = i;
        }
    }
    const double angle = angles[best];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (Point2& p : points) {
        p = Point2{c * p.x - s * p.y, s * p.x + c * p.y};
    }
    return ManhattanAlignment{angle, entropies[best]};
}

}  // namespace

ManhattanAlignment align_manhattan(std::vector<Point2>& points, double angle_step) {
    return align_manhattan_impl(points, angle_step, true);
}

ManhattanAlignment align_manhattan_serial(std::vector<Point2>& points, double angle_step) {
    return align_manhattan_impl(points, angle_step, false);
}

std::vector<Submap> segment_submaps(std::span<const TrajectoryPoint> samples, double window,
                                    double stride, const std::string& prefix) {
    if (window <= 0.0 || stride <= 0.0) {
        throw std::invalid_argument("segment_submaps: window and stride must be positive");
    }
    if (samples.empty()) {
        throw std::invalid_argument("segment_submaps: no samples");
    }
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].travel < samples[i - 1].travel) {
            throw std::invalid_argument("segment_submaps: travel must be nondecreasing");
        }
    }
    const double t0 = samples.front().travel;
    const double total = samples.back().travel - t0;
    std::size_t count = 1;
    if (total > window) {
        count = static_cast<std::size_t>(std::ceil((total - window) / stride - 1e-9)) + 1;
    }

    std::vector<Submap> submaps;
    submaps.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double start = t0 + static_cast<double>(i) * stride;
        const double end = start + window;
        auto first = std::lower_bound(samples.begin(), samples.end(), start,
                                      [](const TrajectoryPoint& s, double v) {
                                          return s.travel < v;
                                      });
        auto last = std::upper_bound(samples.begin(), samples.end(), end,
                                     [](double v, const TrajectoryPoint& s) {
                                         return v < s.travel;
                                     });
        if (first == last) {
            throw EmptySubmapError("segment_submaps: window " + std::to_string(i) +
                                   " captures no points (window shorter than point spacing?)");
        }
        std::vector<Point2> points;
        points.reserve(static_cast<std::size_t>(last - first));
        Point2 centroid{0.0, 0.0};
        for (auto it = first; it != last; ++it) {
            points.push_back(it->position);
            centroid.x += it->position.x;
            centroid.y += it->position.y;
        }
        const double n = static_cast<double>(points.size());
        centroid.x /= n;
        centroid.y /= n;

        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "%03zu", i);
        Submap submap;
        submap.map = make_point_set_map(prefix + "_" + suffix, std::move(points));
        submap.pose = centroid;
        submap.travel = start + window / 2.0;
        submaps.push_back(std::move(submap));
    }
    return submaps;
}

}  // namespace partmatch
