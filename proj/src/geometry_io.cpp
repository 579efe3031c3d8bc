#include "polynet/geometry_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace polynet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError(where + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field \"" + key + "\"");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

Vector vector_of(const json& v, const std::string& where, Eigen::Index expected = -1) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected) {
    fail(where, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(v.size()));
  }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

std::vector<Vector> points_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of points");
  std::vector<Vector> pts;
  Eigen::Index d = -1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    pts.push_back(vector_of(v[i], where + "[" + std::to_string(i) + "]", d));
    d = pts.back().size();
  }
  return pts;
}

ConvexPolytope polytope_of(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected a polytope object");
  if (obj.contains("vertices")) {
    auto pts = points_of(obj["vertices"], where + ".vertices");
    const auto d = pts.front().size();
    if (static_cast<Eigen::Index>(pts.size()) != d + 1) {
      fail(where + ".vertices", "vertex form is for full-dimensional simplices (d + 1 points)");
    }
    return facet_hyperplanes(Simplex(pts));
  }
  const json& normals = field(obj, "normals", where);
  const json& offsets = field(obj, "offsets", where);
  auto ns = points_of(normals, where + ".normals");
  Vector bs = vector_of(offsets, where + ".offsets", static_cast<Eigen::Index>(ns.size()));
  std::vector<Hyperplane> faces;
  for (std::size_t i = 0; i < ns.size(); ++i) faces.push_back(Hyperplane::normalized(ns[i], bs[static_cast<Eigen::Index>(i)]));
  return ConvexPolytope(std::move(faces));
}

std::vector<ConvexPolytope> polytopes_of(const json& arr, const std::string& where, bool allow_empty) {
  if (!arr.is_array()) fail(where, "expected an array of polytopes");
  if (arr.empty() && !allow_empty) fail(where, "must list at least one polytope");
  std::vector<ConvexPolytope> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(polytope_of(arr[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Box box_of(const json& obj, const std::string& where) {
  Vector lo = vector_of(field(obj, "min", where), where + ".min");
  Vector hi = vector_of(field(obj, "max", where), where + ".max", lo.size());
  return {lo, hi};
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json polytope_json(const ConvexPolytope& p) {
  json normals = json::array();
  json offsets = json::array();
  for (const auto& f : p.faces()) {
    normals.push_back(vec_json(f.normal));
    offsets.push_back(f.offset);
  }
  return {{"normals", normals}, {"offsets", offsets}};
}

}  // namespace

GeometrySpec parse_geometry(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("geometry file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("geometry", "top level must be an object");
  const json& kind_field = field(doc, "kind", "geometry");
  if (!kind_field.is_string()) fail("geometry.kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();

  std::optional<double> eps;
  if (doc.contains("epsilon")) eps = number(doc["epsilon"], "geometry.epsilon");
  std::optional<double> inner;
  if (doc.contains("inner_shell")) inner = number(doc["inner_shell"], "geometry.inner_shell");

  auto make = [&](Space s) { return GeometrySpec{kind, std::move(s), eps, inner}; };

  if (kind == "polytope") return make(polytope_of(doc, "geometry"));
  if (kind == "union") return make(PolytopeUnion{polytopes_of(field(doc, "polytopes", "geometry"), "polytopes", false)});
  if (kind == "difference") {
    auto pos = polytopes_of(field(doc, "positives", "geometry"), "positives", false);
    std::vector<ConvexPolytope> neg;
    if (doc.contains("negatives")) neg = polytopes_of(doc["negatives"], "negatives", true);
    return make(DifferenceSet{std::move(pos), std::move(neg)});
  }
  if (kind == "complex") {
    const json& facets = field(doc, "facets", "geometry");
    if (!facets.is_array() || facets.empty()) fail("facets", "expected a nonempty array");
    std::vector<Simplex> simplices;
    for (std::size_t i = 0; i < facets.size(); ++i) {
      const std::string where = "facets[" + std::to_string(i) + "]";
      simplices.emplace_back(points_of(field(facets[i], "vertices", where), where + ".vertices"));
    }
    return make(SimplicialComplex(std::move(simplices)));
  }
  if (kind == "cuboid_holes") {
    Box outer = box_of(field(doc, "outer", "geometry"), "outer");
    std::vector<Box> holes;
    if (doc.contains("holes")) {
      const json& hs = doc["holes"];
      if (!hs.is_array()) fail("holes", "expected an array");
      for (std::size_t i = 0; i < hs.size(); ++i) holes.push_back(box_of(hs[i], "holes[" + std::to_string(i) + "]"));
    }
    return make(CuboidHoleSpace(std::move(outer), std::move(holes)));
  }
  fail("geometry.kind", "unknown kind \"" + kind + "\"");
}

GeometrySpec load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read geometry file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_geometry(ss.str());
}

std::string geometry_to_json(const Space& space) {
  json doc;
  if (const auto* p = std::get_if<ConvexPolytope>(&space)) {
    doc = polytope_json(*p);
    doc["kind"] = "polytope";
  } else if (const auto* u = std::get_if<PolytopeUnion>(&space)) {
    doc["kind"] = "union";
    doc["polytopes"] = json::array();
    for (const auto& m : u->members) doc["polytopes"].push_back(polytope_json(m));
  } else if (const auto* d = std::get_if<DifferenceSet>(&space)) {
    doc["kind"] = "difference";
    doc["positives"] = json::array();
    doc["negatives"] = json::array();
    for (const auto& m : d->positives) doc["positives"].push_back(polytope_json(m));
    for (const auto& m : d->negatives) doc["negatives"].push_back(polytope_json(m));
  } else if (const auto* k = std::get_if<SimplicialComplex>(&space)) {
    doc["kind"] = "complex";
    doc["facets"] = json::array();
    for (const auto& s : k->facets()) {
      json verts = json::array();
      for (int i = 0; i <= s.dim(); ++i) verts.push_back(vec_json(s.vertex(i)));
      doc["facets"].push_back({{"vertices", verts}});
    }
  } else {
    const auto& c = std::get<CuboidHoleSpace>(space);
    doc["kind"] = "cuboid_holes";
    doc["outer"] = {{"min", vec_json(c.outer().lo)}, {"max", vec_json(c.outer().hi)}};
    doc["holes"] = json::array();
    for (const auto& h : c.holes()) doc["holes"].push_back({{"min", vec_json(h.lo)}, {"max", vec_json(h.hi)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace polynet
