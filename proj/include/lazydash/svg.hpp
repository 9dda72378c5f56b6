#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lazydash/validate.hpp"

namespace lazydash {

// Frame-by-frame SVG export of an executed schedule: walls, surfaces, arms as
// capsules, objects as discs, goal markers. One file per dt step.

inline int export_svg(const nlohmann::ordered_json& scenario,
                      const nlohmann::ordered_json& report, double dt,
                      const std::string& dir) {
  using validate_detail::P;
  using validate_detail::Track;
  namespace fs = std::filesystem;
  const auto& ex = report.at("execution");
  const double makespan = ex.at("makespan").get<double>();
  const auto& b = scenario.at("bounds");
  const double x0 = b.at(0).get<double>(), y0 = b.at(1).get<double>();
  const double x1 = b.at(2).get<double>(), y1 = b.at(3).get<double>();
  const double scale = 160.0;

  struct RobotView {
    P base;
    double halfwidth;
    Track track;
  };
  struct ObjectView {
    double radius;
    P goal;
    Track track;
  };
  std::vector<RobotView> robots;
  std::vector<ObjectView> objects;
  for (const auto& r : ex.at("robots")) {
    robots.push_back({{r.at("base").at(0).get<double>(), r.at("base").at(1).get<double>()},
                      r.at("arm_halfwidth").get<double>(),
                      validate_detail::parse_track(r.at("segments"))});
  }
  for (const auto& o : ex.at("objects")) {
    objects.push_back({o.at("radius").get<double>(),
                       {o.at("goal").at(0).get<double>(), o.at("goal").at(1).get<double>()},
                       validate_detail::parse_track(o.at("segments"))});
  }

  fs::create_directories(dir);
  const int frames = static_cast<int>(std::floor(makespan / dt)) + 1;
  const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  for (int f = 0; f < frames; ++f) {
    const double t = f * dt;
    std::ostringstream svg;
    const auto sx = [&](double x) { return (x - x0) * scale; };
    const auto sy = [&](double y) { return (y1 - y) * scale; };  // flip y
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << (x1 - x0) * scale
        << "' height='" << (y1 - y0) * scale << "'>\n";
    svg << "<rect width='100%' height='100%' fill='#fafafa'/>\n";
    for (const auto& s : scenario.at("surfaces")) {
      const auto& rc = s.at("rect");
      svg << "<rect x='" << sx(rc.at(0).get<double>()) << "' y='"
          << sy(rc.at(3).get<double>()) << "' width='"
          << (rc.at(2).get<double>() - rc.at(0).get<double>()) * scale << "' height='"
          << (rc.at(3).get<double>() - rc.at(1).get<double>()) * scale
          << "' fill='#eef2e6' stroke='#cccccc'/>\n";
    }
    for (const auto& wj : scenario.value("walls", nlohmann::ordered_json::array())) {
      svg << "<line x1='" << sx(wj.at("a").at(0).get<double>()) << "' y1='"
          << sy(wj.at("a").at(1).get<double>()) << "' x2='"
          << sx(wj.at("b").at(0).get<double>()) << "' y2='"
          << sy(wj.at("b").at(1).get<double>()) << "' stroke='#333333' stroke-width='"
          << 2.0 * wj.at("halfwidth").get<double>() * scale
          << "' stroke-linecap='round'/>\n";
    }
    for (size_t i = 0; i < objects.size(); ++i) {
      svg << "<circle cx='" << sx(objects[i].goal.x) << "' cy='" << sy(objects[i].goal.y)
          << "' r='" << objects[i].radius * scale << "' fill='none' stroke='"
          << palette[i % 8] << "' stroke-dasharray='4,3'/>\n";
    }
    for (size_t i = 0; i < robots.size(); ++i) {
      const P e = robots[i].track.at(t);
      svg << "<line x1='" << sx(robots[i].base.x) << "' y1='" << sy(robots[i].base.y)
          << "' x2='" << sx(e.x) << "' y2='" << sy(e.y) << "' stroke='#444444'"
          << " stroke-width='" << 2.0 * robots[i].halfwidth * scale
          << "' stroke-linecap='round'/>\n";
      svg << "<circle cx='" << sx(robots[i].base.x) << "' cy='" << sy(robots[i].base.y)
          << "' r='4' fill='#222222'/>\n";
    }
    for (size_t i = 0; i < objects.size(); ++i) {
      const P c = objects[i].track.at(t);
      svg << "<circle cx='" << sx(c.x) << "' cy='" << sy(c.y) << "' r='"
          << objects[i].radius * scale << "' fill='" << palette[i % 8] << "'/>\n";
    }
    svg << "<text x='8' y='16' font-family='monospace' font-size='12'>t="
        << std::fixed << std::setprecision(2) << t << "</text>\n</svg>\n";

    std::ostringstream name;
    name << dir << "/frame_" << std::setw(5) << std::setfill('0') << f << ".svg";
    std::ofstream out(name.str());
    out << svg.str();
  }
  return frames;
}

}  // namespace lazydash
