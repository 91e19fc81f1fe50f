#pragma once

// JSON schemas for grids, marginals, quartets, triplets, witnesses and 4-D
// densities. Parse failures surface as InputError.

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "phaselab/bell.hpp"
#include "phaselab/error.hpp"
#include "phaselab/marginal.hpp"
#include "phaselab/quad.hpp"
#include "phaselab/reconstruct.hpp"

namespace phaselab::io {

using json = nlohmann::json;

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

// Non-finite numbers are written as "inf", "-inf" or "nan".
inline json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

inline double parse_endpoint(const json& j, double if_null) {
  if (j.is_null()) return if_null;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InputError("bad interval endpoint '" + s + "'");
  }
  return j.get<double>();
}

// {"nodes": [...], "weights": [...]} or {"panels": [[lo, hi], ...], "order": n}
inline quad::Grid1D grid_from_json(const json& j) {
  return guarded("grid", [&] {
    if (j.contains("panels")) {
      std::vector<quad::Panel> ps;
      for (const auto& p : j.at("panels")) ps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      return quad::Grid1D::from_panels(std::move(ps), j.at("order").get<int>());
    }
    return quad::Grid1D(j.at("nodes").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
  });
}

inline json to_json(const quad::Grid1D& g) {
  json j;
  if (g.panelled()) {
    json ps = json::array();
    for (const auto& p : g.panels()) ps.push_back({p.lo, p.hi});
    j["panels"] = ps;
    j["order"] = g.order();
  } else {
    j["nodes"] = g.nodes();
    j["weights"] = g.weights();
  }
  return j;
}

inline marginal::Marginal2D marginal_from_json(const json& j) {
  return guarded("marginal", [&] {
    const auto plane = marginal::plane_from_string(j.at("plane").get<std::string>());
    if (j.contains("atoms")) {
      marginal::AtomicMixture atoms;
      for (const auto& a : j.at("atoms")) atoms.push_back({a.at("x").get<double>(), a.at("y").get<double>(), a.at("w").get<double>()});
      return marginal::Marginal2D(plane, std::move(atoms));
    }
    marginal::GriddedDensity d{grid_from_json(j.at("grid1")), grid_from_json(j.at("grid2")), {}};
    const auto& rows = j.at("values");
    if (rows.size() != d.axis1.size()) throw InputError("marginal values: row count differs from grid1");
    for (const auto& row : rows) {
      if (row.size() != d.axis2.size()) throw InputError("marginal values: row length differs from grid2");
      for (const auto& v : row) d.values.push_back(v.get<double>());
    }
    return marginal::Marginal2D(plane, std::move(d));
  });
}

inline json to_json(const marginal::Marginal2D& m) {
  json j;
  j["plane"] = marginal::to_string(m.plane());
  if (m.atomic()) {
    json atoms = json::array();
    for (const auto& a : m.atoms()) atoms.push_back({{"x", a.x}, {"y", a.y}, {"w", a.w}});
    j["atoms"] = atoms;
    return j;
  }
  const auto& d = m.density();
  j["grid1"] = to_json(d.axis1);
  j["grid2"] = to_json(d.axis2);
  json rows = json::array();
  for (std::size_t i = 0; i < d.axis1.size(); ++i) {
    rows.push_back(std::vector<double>(d.values.begin() + i * d.axis2.size(), d.values.begin() + (i + 1) * d.axis2.size()));
  }
  j["values"] = rows;
  return j;
}

inline marginal::QuartetProblem quartet_from_json(const json& j) {
  return guarded("quartet", [&] {
    return marginal::QuartetProblem(marginal_from_json(j.at("R")), marginal_from_json(j.at("S")),
                                    marginal_from_json(j.at("T")), marginal_from_json(j.at("U")));
  });
}

inline json to_json(const marginal::QuartetProblem& q) {
  return {{"R", to_json(q.R)}, {"S", to_json(q.S)}, {"T", to_json(q.T)}, {"U", to_json(q.U)}};
}

inline marginal::TripletProblem triplet_from_json(const json& j) {
  return guarded("triplet", [&] {
    return marginal::TripletProblem(marginal_from_json(j.at("sigma0")), marginal_from_json(j.at("sigma1")),
                                    marginal_from_json(j.at("sigma2")));
  });
}

inline json to_json(const marginal::TripletProblem& t) {
  return {{"sigma0", to_json(t.sigma0)}, {"sigma1", to_json(t.sigma1)}, {"sigma2", to_json(t.sigma2)}};
}

// A region is a list of [lo, hi] pairs; null or "-inf"/"inf" mark open ends.
inline bell::Region region_from_json(const json& j) {
  return guarded("region", [&] {
    std::vector<bell::Interval> ivs;
    for (const auto& p : j) {
      if (!p.is_array() || p.size() != 2) throw InputError("region intervals must be [lo, hi] pairs");
      ivs.push_back({parse_endpoint(p[0], -std::numeric_limits<double>::infinity()),
                     parse_endpoint(p[1], std::numeric_limits<double>::infinity())});
    }
    return bell::Region(std::move(ivs));
  });
}

inline json to_json(const bell::Region& r) {
  json j = json::array();
  for (const auto& iv : r.intervals()) j.push_back({number(iv.lo), number(iv.hi)});
  return j;
}

inline bell::BellWitness witness_from_json(const json& j) {
  return guarded("witness", [&] {
    return bell::BellWitness{region_from_json(j.at("S1")), region_from_json(j.at("S2")), region_from_json(j.at("S1p")),
                             region_from_json(j.at("S2p"))};
  });
}

inline json to_json(const bell::BellWitness& w) {
  return {{"S1", to_json(w.S1)}, {"S2", to_json(w.S2)}, {"S1p", to_json(w.S1p)}, {"S2p", to_json(w.S2p)}};
}

inline marginal::CounterexampleAtoms counterexample_from_json(const json& j) {
  return guarded("counterexample parameters", [&] {
    return marginal::CounterexampleAtoms{j.at("a1").get<double>(), j.at("a2").get<double>(), j.at("a1p").get<double>(),
                                         j.at("a2p").get<double>(), j.at("b1").get<double>(), j.at("b2").get<double>(),
                                         j.at("b1p").get<double>(), j.at("b2p").get<double>()};
  });
}

// {"axes": [grid q1, grid q2, grid p1, grid p2], "values": [[[[...]]]]}
inline reconstruct::Dense4D dense_from_json(const json& j) {
  return guarded("dense array", [&] {
    const auto& ax = j.at("axes");
    if (ax.size() != 4) throw InputError("dense array needs four axes");
    reconstruct::Dense4D d({grid_from_json(ax[0]), grid_from_json(ax[1]), grid_from_json(ax[2]), grid_from_json(ax[3])});
    const auto [n0, n1, n2, n3] = d.shape();
    const auto& v = j.at("values");
    if (v.size() != n0) throw InputError("dense array: q1 extent mismatch");
    for (std::size_t i = 0; i < n0; ++i) {
      if (v[i].size() != n1) throw InputError("dense array: q2 extent mismatch");
      for (std::size_t k1 = 0; k1 < n1; ++k1) {
        if (v[i][k1].size() != n2) throw InputError("dense array: p1 extent mismatch");
        for (std::size_t k2 = 0; k2 < n2; ++k2) {
          if (v[i][k1][k2].size() != n3) throw InputError("dense array: p2 extent mismatch");
          for (std::size_t l = 0; l < n3; ++l) d.at(i, k1, k2, l) = v[i][k1][k2][l].get<double>();
        }
      }
    }
    return d;
  });
}

inline json to_json(const reconstruct::Dense4D& d) {
  json ax = json::array();
  for (const auto& g : d.axes) ax.push_back(to_json(g));
  const auto [n0, n1, n2, n3] = d.shape();
  json v = json::array();
  for (std::size_t i = 0; i < n0; ++i) {
    json a = json::array();
    for (std::size_t j = 0; j < n1; ++j) {
      json b = json::array();
      for (std::size_t k = 0; k < n2; ++k) {
        const double* row = &d.values[d.index(i, j, k, 0)];
        b.push_back(std::vector<double>(row, row + n3));
      }
      a.push_back(std::move(b));
    }
    v.push_back(std::move(a));
  }
  return {{"axes", ax}, {"values", v}};
}

}  // namespace phaselab::io
