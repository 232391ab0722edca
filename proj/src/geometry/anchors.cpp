#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mkd5/geometry.hpp"

namespace mkd5 {
namespace {

// certified by the stochastic packing run behind the default geometry:
// pairwise plane separation d_min = 0.58498 (pair U3/B5)
constexpr double default_anchor_table[40][5] = {
    {2.3575287869426527, 5.321546215665802, 4.070612757908053, 5.5013076224988495, 2.747990609594178},
    {2.6579521779090527, 0.44574476152305786, 0.41353816596966064, 3.535632467402993, 5.179698888281612},
    {1.0658559584772813, 1.2621050910748168, 2.0593382877306405, 1.3899373923511835, 5.884373023506283},
    {2.985459610862536, 3.5211894427458894, 1.9914495943553676, 4.317451026072201, 6.625747311136202},
    {2.023148025237841, 2.968478650669615, 3.97559761590737, 5.452455597646597, 6.039266190373779},
    {4.816524843134018, 5.069540472225791, 1.9798414900065902, 3.8992737481426842, 3.8435344955195445},
    {4.9518604172958565, 2.616554928110262, 0.797593814464152, 5.220329041639086, 4.883156113491581},
    {6.093871403052747, 5.026459584989908, 1.7962309166230777, -0.31858712297035674, 2.9676000279831527},
    {2.601887610106541, 5.020629266988137, 4.502207623867884, 4.303746648157245, 0.6433931629134543},
    {0.3071226329931506, 2.545889411122618, 1.6844917177208556, 3.375222561824127, 2.3710281595291893},
    {3.736509076833872, 0.404786033622546, 3.812154918310108, 2.3117002225103414, 5.790010559464945},
    {4.223725338098032, 3.746705452344875, 3.802216285079829, 0.915933733416544, 0.9542997766744455},
    {2.5380115800503, 5.715340244253796, 2.7505878656367595, 5.822313827640853, 1.3902168045261818},
    {2.4476568814800848, 2.046194308808692, 4.294887484833433, 4.805261554526914, 1.8236948688710557},
    {3.4227880872771523, 5.379937584700914, 2.5509584730593837, 0.1921731757992744, 3.873590263600639},
    {1.4254137174455885, -1.0932449210378061, 2.3136252640675576, 3.3851110778099214, 1.1177106189553851},
    {6.637034613191184, 5.2614695978846555, 0.3799272471209683, 1.4569013590143984, 5.300128408811396},
    {0.5731793764014371, 4.643938715363502, 2.0841676502122164, 0.37381919869132424, 2.242238039694939},
    {1.7807230015295703, 0.10319211592621533, 4.5673262374489685, 4.835678676986813, 3.281743346590413},
    {2.3905034731250407, 2.2176246951845404, 2.1941170938209016, 2.8442394034619514, 3.7069634475853626},
    {4.284687731361334, 1.8595663803223015, 0.441970593042836, 1.2399710360118859, 5.412977676153694},
    {0.6673378348131491, 2.751410953554594, 1.889676080387977, 4.718378254262182, 2.7495328201784663},
    {4.716028873393665, 1.7080535490471382, 0.525752310909807, 0.6486387195734138, 2.056713177831092},
    {4.524677295210961, 1.5401709473997227, 3.9615313150412534, 2.680349992297513, 0.31145421525926137},
    {1.4272799550015804, 1.91508913672161, 2.216865991697521, 3.1893557570858704, 3.151506173693514},
    {6.092254701725894, 0.35299042900039823, 0.6850301424396236, 3.838318963154637, 3.6636398883073684},
    {1.7967599247133204, 2.2388880537955447, 6.309078916535852, 0.27314188868703826, 0.04863623573332747},
    {2.8244509701315796, 2.741033400769259, 2.864972298207882, 3.0932922396031564, 2.433042509293307},
    {3.716739582213871, 5.540456782488391, 3.458042514595228, 3.156289986565026, 1.4234341652598845},
    {5.555906160391674, 2.428437159310479, 4.299973599996046, 4.871872846396207, 3.6425880983322627},
    {3.8714467488728954, 6.0343342405124165, 3.7966039190138328, 3.590602928139769, 5.091983316409648},
    {-0.8192489934448237, 1.4040031989810267, 1.4576660325364112, 1.9886774942336056, 0.9807496146326475},
    {1.8051066467671033, 3.1353811012095067, 6.0917044601124966, 6.075133609958076, 0.8021062638691989},
    {3.8573115061653507, 3.2849174899770532, 2.20450260225275, 5.804006740024538, 4.556071043215968},
    {1.539665127147972, 4.273229745326282, 1.9452224773231255, 4.859445057806346, 1.494866840909563},
    {5.435119682374405, 4.14990633161196, 4.709781938795609, 0.28602727659142196, 2.1566117764905757},
    {1.8004204770479002, 2.302973675011473, 4.783375652314908, 2.507611378215616, 1.8934301414142816},
    {2.5005046898465113, 0.24116419802072367, 2.2489699709899296, 1.2615178790521344, 4.8809326410802045},
    {4.216622804752261, -0.013584634239724915, 1.611799156067264, 0.5280841369546191, 1.3679230521378467},
    {2.4143478021078697, 1.8060331404877517, 2.6780020207531607, 5.01523241290428, 4.503723345945413},
};

struct pair_lattice {
  Eigen::MatrixXd nperp;                 // rows: mutual normal basis
  std::vector<Eigen::VectorXd> offsets;  // projected 2 pi Z^5, deduped
};

// mutual normal space of span(xi1, xi2, xi1', xi2') and the projected torus
// offsets that control the plane distance
pair_lattice build_pair_lattice(const anchored_frame& f1,
                                const anchored_frame& f2, int box,
                                double rmax) {
  Eigen::MatrixXd planes(4, 5);
  const vec5* rows[4] = {&f1.xi1, &f1.xi2, &f2.xi1, &f2.xi2};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) planes(r, c) = (*rows[r])[c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(planes, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10) ++rank;
  pair_lattice out;
  out.nperp = svd.matrixV().rightCols(5 - rank).transpose();
  if (out.nperp.rows() == 0) return out;

  std::vector<Eigen::VectorXd> seen;
  for (int m0 = -box; m0 <= box; ++m0)
    for (int m1 = -box; m1 <= box; ++m1)
      for (int m2 = -box; m2 <= box; ++m2)
        for (int m3 = -box; m3 <= box; ++m3)
          for (int m4 = -box; m4 <= box; ++m4) {
            Eigen::VectorXd m(5);
            m << m0, m1, m2, m3, m4;
            Eigen::VectorXd p = out.nperp * (tau * m);
            if (p.norm() > rmax) continue;
            bool dup = false;
            for (const auto& q : seen)
              if ((q - p).norm() < 1e-9) {
                dup = true;
                break;
              }
            if (!dup) seen.push_back(p);
          }
  out.offsets = std::move(seen);
  return out;
}

double lattice_distance(const pair_lattice& pl, const vec5& a1,
                        const vec5& a2) {
  if (pl.nperp.rows() == 0) return 0.0;
  Eigen::VectorXd d(5);
  for (int i = 0; i < 5; ++i) d(i) = a1[i] - a2[i];
  Eigen::VectorXd v = pl.nperp * d;
  double best = 1e300;
  for (const auto& off : pl.offsets) best = std::min(best, (v + off).norm());
  return best;
}

// Halton sequence (primes 2,3,5,7,11; the leading entries are skipped to
// avoid the degenerate early stripes)
vec5 halton_point(int i) {
  const int primes[5] = {2, 3, 5, 7, 11};
  vec5 out;
  for (int d = 0; d < 5; ++d) {
    double f = 1.0, r = 0.0;
    int idx = i + 21;
    while (idx > 0) {
      f /= primes[d];
      r += f * (idx % primes[d]);
      idx /= primes[d];
    }
    out[d] = tau * r;
  }
  return out;
}

}  // namespace

double min_plane_separation(const anchored_frame& f1, const anchored_frame& f2,
                            int box) {
  pair_lattice pl = build_pair_lattice(f1, f2, box, 8.0);
  return lattice_distance(pl, f1.anchor, f2.anchor);
}

double certify_min_separation(const std::vector<anchored_frame>& frames) {
  double best = 1e300;
  for (std::size_t i = 0; i < frames.size(); ++i)
    for (std::size_t j = i + 1; j < frames.size(); ++j)
      best = std::min(best, min_plane_separation(frames[i], frames[j]));
  return best;
}

std::vector<vec5> place_anchors(std::vector<anchored_frame>& frames,
                                double target, int candidates) {
  const std::size_t nf = frames.size();
  std::vector<std::vector<pair_lattice>> pl(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    pl[i].resize(i);
    for (std::size_t j = 0; j < i; ++j)
      pl[i][j] = build_pair_lattice(frames[i], frames[j], 3, 8.0);
  }
  std::vector<vec5> anchors(nf);
  anchors[0] = halton_point(0);
  double overall = 1e300;
  for (std::size_t i = 1; i < nf; ++i) {
    double best_val = -1.0;
    vec5 best{};
    for (int c = 0; c < candidates; ++c) {
      vec5 cand = halton_point(c);
      double dmin = 1e300;
      for (std::size_t j = 0; j < i; ++j) {
        dmin = std::min(dmin, lattice_distance(pl[i][j], cand, anchors[j]));
        if (dmin <= best_val) break;
      }
      if (dmin > best_val) {
        best_val = dmin;
        best = cand;
      }
    }
    anchors[i] = best;
    overall = std::min(overall, best_val);
  }
  if (overall < target)
    throw placement_failure("greedy placement reached separation " +
                            std::to_string(overall) + " < target " +
                            std::to_string(target));
  for (std::size_t i = 0; i < nf; ++i) frames[i].anchor = anchors[i];
  return anchors;
}

geometry_bundle default_geometry() {
  geometry_bundle g;
  auto [u, b] = default_direction_families();
  g.U = std::move(u);
  g.B = std::move(b);
  for (int i = 0; i < 20; ++i)
    for (int d = 0; d < 5; ++d) {
      g.U[i].anchor[d] = default_anchor_table[i][d];
      g.B[i].anchor[d] = default_anchor_table[20 + i][d];
    }
  g.sym = solve_sym_decomposition(g.U);
  g.skew = solve_skew_decomposition(g.B);
  g.eps0 = std::min(g.sym.eps0, g.skew.eps0);
  g.C = window_constant(g.sym, g.skew);
  std::vector<anchored_frame> all = g.U;
  all.insert(all.end(), g.B.begin(), g.B.end());
  g.d_min = certify_min_separation(all);
  g.seed_u = 15;
  g.seed_b = 10;
  return g;
}

std::string geometry_to_json(const geometry_bundle& g) {
  nlohmann::json j;
  auto frame_json = [](const anchored_frame& f) {
    nlohmann::json fj;
    fj["family"] = f.family == family_t::U ? "U" : "B";
    fj["q"] = f.common_denominator;
    auto put = [&](const char* name, const vec5& v) {
      std::vector<long> num(5);
      for (int i = 0; i < 5; ++i)
        num[i] = std::lround(v[i] * double(f.common_denominator));
      fj[name] = num;
    };
    put("xi", f.xi);
    put("xi1", f.xi1);
    put("xi2", f.xi2);
    put("xi3", f.xi3);
    put("xi4", f.xi4);
    fj["anchor"] = std::vector<double>(f.anchor.begin(), f.anchor.end());
    return fj;
  };
  for (const auto& f : g.U) j["U"].push_back(frame_json(f));
  for (const auto& f : g.B) j["B"].push_back(frame_json(f));
  j["c"] = g.sym.c;
  j["d"] = g.skew.d;
  j["eps0"] = g.eps0;
  j["eps0_sym"] = g.sym.eps0;
  j["eps0_skew"] = g.skew.eps0;
  j["C"] = g.C;
  j["d_min"] = g.d_min;
  j["seed_u"] = g.seed_u;
  j["seed_b"] = g.seed_b;
  return j.dump(2);
}

}  // namespace mkd5
