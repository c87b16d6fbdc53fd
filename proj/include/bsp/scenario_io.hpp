#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "bsp/scenario.hpp"

namespace bsp {

/// Scenario files are JSON with fields mirroring Scenario one-to-one; see
/// docs/scenario_format.md. Writing is canonical (sorted keys, two-space
/// indent), so write -> read -> write is byte-identical.

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["kind"] = sc.kind == ScenarioKind::Navigation ? "navigation" : "tracking";
  j["beacons"] = nlohmann::json::array();
  for (const auto& b : sc.beacons) j["beacons"].push_back({b.x(), b.y()});
  j["obstacles"] = nlohmann::json::array();
  for (const auto& o : sc.obstacles) {
    j["obstacles"].push_back({{"center", {o.center.x(), o.center.y()}},
                              {"radius", o.radius},
                              {"shape", o.shape == ObstacleShape::Disk ? "disk" : "square"}});
  }
  if (sc.kind == ScenarioKind::Navigation) {
    j["goal"] = {sc.goal.x(), sc.goal.y()};
  } else {
    j["target_script"] = nlohmann::json::array();
    for (const auto& a : sc.target_script) j["target_script"].push_back({a.x(), a.y()});
  }
  j["noise"] = {{"sigma_w_sq", sc.noise.sigma_w_sq},
                {"sigma_v_sq", sc.noise.sigma_v_sq},
                {"r_min", sc.noise.r_min},
                {"gamma", sc.noise.gamma}};
  j["prior_mean"] = std::vector<double>(sc.prior_mean.data(),
                                        sc.prior_mean.data() + sc.prior_mean.size());
  j["prior_cov"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < sc.prior_cov.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < sc.prior_cov.cols(); ++c) row.push_back(sc.prior_cov(r, c));
    j["prior_cov"].push_back(row);
  }
  j["ground_truth_init"] = std::vector<double>(
      sc.ground_truth_init.data(), sc.ground_truth_init.data() + sc.ground_truth_init.size());
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "navigation")
    sc.kind = ScenarioKind::Navigation;
  else if (kind == "tracking")
    sc.kind = ScenarioKind::Tracking;
  else
    throw ConfigError("scenario: unknown kind '" + kind + "'");

  for (const auto& b : j.at("beacons"))
    sc.beacons.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  for (const auto& o : j.value("obstacles", nlohmann::json::array())) {
    Obstacle ob;
    ob.center = Eigen::Vector2d(o.at("center").at(0).get<double>(),
                                o.at("center").at(1).get<double>());
    ob.radius = o.at("radius").get<double>();
    const std::string shape = o.at("shape").get<std::string>();
    if (shape == "disk")
      ob.shape = ObstacleShape::Disk;
    else if (shape == "square")
      ob.shape = ObstacleShape::Square;
    else
      throw ConfigError("scenario: unknown obstacle shape '" + shape + "'");
    sc.obstacles.push_back(ob);
  }
  if (sc.kind == ScenarioKind::Navigation) {
    sc.goal = Eigen::Vector2d(j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>());
  } else {
    for (const auto& a : j.at("target_script"))
      sc.target_script.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
  }
  const auto& n = j.at("noise");
  sc.noise.sigma_w_sq = n.at("sigma_w_sq").get<double>();
  sc.noise.sigma_v_sq = n.at("sigma_v_sq").get<double>();
  sc.noise.r_min = n.at("r_min").get<double>();
  sc.noise.gamma = n.at("gamma").get<double>();

  const auto mean = j.at("prior_mean").get<std::vector<double>>();
  sc.prior_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                    static_cast<Eigen::Index>(mean.size()));
  const auto& cov = j.at("prior_cov");
  sc.prior_cov.resize(static_cast<Eigen::Index>(cov.size()),
                      static_cast<Eigen::Index>(cov.size()));
  for (std::size_t r = 0; r < cov.size(); ++r)
    for (std::size_t c = 0; c < cov.at(r).size(); ++c)
      sc.prior_cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cov.at(r).at(c).get<double>();
  const auto gt = j.at("ground_truth_init").get<std::vector<double>>();
  sc.ground_truth_init =
      Eigen::Map<const Eigen::VectorXd>(gt.data(), static_cast<Eigen::Index>(gt.size()));
  sc.validate();
  return sc;
}

inline void write_scenario(const std::string& path, const Scenario& sc) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << scenario_to_json(sc).dump(2) << "\n";
}

inline Scenario read_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open scenario file " + path);
  nlohmann::json j;
  is >> j;
  return scenario_from_json(j);
}

}  // namespace bsp
