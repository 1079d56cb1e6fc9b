#include "asmplan/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace asmplan {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError((where.empty() ? std::string("/") : where) + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

bool boolean(const Json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

const Json& array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

Vec3 vec3(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
  return {number(j[0], where + "/0"), number(j[1], where + "/1"),
          number(j[2], where + "/2")};
}

std::string at(const std::string& where, const std::string& key) {
  return where + "/" + key;
}
std::string at(const std::string& where, std::size_t index) {
  return where + "/" + std::to_string(index);
}

Rotation rotation(const Json& j, const std::string& where) {
  const int r = integer(j, where);
  if (r != 0 && r != 1) fail(where, "rot must be 0 or 1");
  return static_cast<Rotation>(r);
}

Json operand(int index, const Catalog& catalog) {
  if (index == kTable) return "TABLE";
  return catalog[index].id;
}

int operand_from_json(const Json& j, const Catalog& catalog, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "TABLE") return kTable;
  const int id = integer(j, where);
  if (!catalog.contains(id)) fail(where, "unknown primitive id " + std::to_string(id));
  return static_cast<int>(catalog.index_of(id));
}

template <typename Map>
Json pose_list(const Map& poses) {
  Json out = Json::array();
  for (const auto& [id, pose] : poses) out.push_back({{"id", id}, {"pose", to_json(pose)}});
  return out;
}

std::map<PrimitiveId, Pose> pose_map(const Json& j, const std::string& where) {
  std::map<PrimitiveId, Pose> out;
  const Json& list = array(j, where);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = at(where, i);
    const int id = integer(field(list[i], "id", w), at(w, "id"));
    if (!out.emplace(id, pose_from_json(field(list[i], "pose", w), at(w, "pose"))).second) {
      fail(w, "duplicate id " + std::to_string(id));
    }
  }
  return out;
}

template <typename Fn>
auto with_file(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json to_json(const Pose& pose) {
  return {{"pos", to_json(pose.position)}, {"rot", quarter_turns(pose.rot)}};
}

Json to_json(const Primitive& prim) {
  return {{"id", prim.id}, {"label", prim.label}, {"dims", to_json(prim.dims)}};
}

Json to_json(const Scene& scene) {
  Json catalog = Json::array();
  for (const Primitive& p : scene.catalog.primitives()) catalog.push_back(to_json(p));
  const Rect& t = scene.table_extent;
  return {{"table", {{"min", {t.min_x, t.min_y}}, {"max", {t.max_x, t.max_y}}}},
          {"catalog", catalog},
          {"placements", pose_list(scene.placements)}};
}

Json to_json(const Observation& obs) {
  Json detections = Json::array();
  for (const auto& [id, pose] : obs.detections) {
    auto c = obs.confidence.find(id);
    detections.push_back({{"id", id},
                          {"pose", to_json(pose)},
                          {"confidence", c == obs.confidence.end() ? 1.0 : c->second}});
  }
  Json fps = Json::array();
  for (const FalsePositive& fp : obs.false_positives) {
    fps.push_back({{"shape", to_json(fp.shape)},
                   {"pose", to_json(fp.pose)},
                   {"confidence", fp.confidence}});
  }
  return {{"detections", detections}, {"false_positives", fps}};
}

Json to_json(const Layout& layout) {
  return {{"pick_poses", pose_list(layout.pick_poses)}};
}

Json to_json(const Operator& op, const Catalog& catalog) {
  Json args = Json::array({catalog[op.actor].id});
  std::string name;
  switch (op.kind) {
    case OpKind::kPutOn:
      name = "PutOn";
      args.push_back(operand(op.first, catalog));
      break;
    case OpKind::kPutOnAlongX:
    case OpKind::kPutOnAlongY:
      name = op.kind == OpKind::kPutOnAlongX ? "PutOnAlongX" : "PutOnAlongY";
      args.push_back(operand(op.first, catalog));
      args.push_back(operand(op.second, catalog));
      break;
    case OpKind::kRotate:
      name = "Rotate";
      break;
  }
  return {{"op", name}, {"args", args}};
}

Json to_json(const OperatorSequence& seq, const Catalog& catalog) {
  Json out = Json::array();
  for (const Operator& op : seq) out.push_back(to_json(op, catalog));
  return out;
}

Json to_json(const PlanResult& plan, const Catalog& catalog) {
  Json steps = Json::array();
  for (const PlanStep& s : plan.steps) {
    Json step = {{"id", s.id}, {"pick", to_json(s.pick)}, {"place", to_json(s.place)}};
    if (s.grasp_axis) step["grasp_axis"] = *s.grasp_axis == GraspAxis::kX ? "x" : "y";
    steps.push_back(step);
  }
  Json trajectory = Json::array();
  for (const auto& [rollout, reward] : plan.best_reward_trajectory) {
    trajectory.push_back({rollout, reward});
  }
  return {{"success", plan.success},
          {"reward", plan.reward},
          {"rollouts_used", plan.rollouts_used},
          {"mean_reward_per_rollout", plan.mean_reward_per_rollout},
          {"search_exhausted", plan.search_exhausted},
          {"diagnostic", plan.diagnostic},
          {"place_offset", to_json(plan.place_offset)},
          {"operator_sequence", to_json(plan.operator_sequence, catalog)},
          {"steps", steps},
          {"solved_poses", pose_list(plan.solved_poses)},
          {"best_reward_trajectory", trajectory}};
}

Json to_json(const VisionConfig& c) {
  return {{"camera_dir", to_json(c.camera_dir)},
          {"occlusion_threshold", c.occlusion_threshold},
          {"pos_noise_sigma", c.pos_noise_sigma},
          {"false_positive_rate", c.false_positive_rate},
          {"confidence_threshold", c.confidence_threshold},
          {"forced_hidden", c.forced_hidden},
          {"seed", c.seed}};
}

Json to_json(const SearchConfig& c) {
  return {{"exploration", c.exploration},
          {"reward_mode", to_string(c.reward_mode)},
          {"guided", c.guided},
          {"rollout_budget", c.rollout_budget},
          {"epsilon", c.epsilon},
          {"uct_variant", to_string(c.uct_variant)},
          {"method", to_string(c.method)},
          {"seed", c.seed},
          {"penetration_removal", c.penetration_removal},
          {"max_augmentations", c.max_augmentations},
          {"place_offset", to_json(c.place_offset)}};
}

Pose pose_from_json(const Json& j, const std::string& where) {
  Pose p;
  p.position = vec3(field(j, "pos", where), at(where, "pos"));
  if (j.contains("rot")) p.rot = rotation(j["rot"], at(where, "rot"));
  return p;
}

Primitive primitive_from_json(const Json& j, const std::string& where) {
  Primitive p;
  p.id = integer(field(j, "id", where), at(where, "id"));
  p.dims = vec3(field(j, "dims", where), at(where, "dims"));
  if (!(p.dims.x > 0 && p.dims.y > 0 && p.dims.z > 0)) {
    fail(at(where, "dims"), "dimensions must be positive");
  }
  if (j.contains("label")) p.label = text(j["label"], at(where, "label"));
  return p;
}

Scene scene_from_json(const Json& j) {
  Scene scene;
  std::vector<Primitive> prims;
  const Json& catalog = array(field(j, "catalog", ""), "/catalog");
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    prims.push_back(primitive_from_json(catalog[i], at("/catalog", i)));
  }
  try {
    scene.catalog = Catalog(std::move(prims));
  } catch (const std::invalid_argument& e) {
    fail("/catalog", e.what());
  }
  if (j.contains("table")) {
    const Json& t = j["table"];
    const Json& lo = field(t, "min", "/table");
    const Json& hi = field(t, "max", "/table");
    if (!lo.is_array() || lo.size() != 2) fail("/table/min", "expected [x, y]");
    if (!hi.is_array() || hi.size() != 2) fail("/table/max", "expected [x, y]");
    scene.table_extent = {number(lo[0], "/table/min/0"), number(hi[0], "/table/max/0"),
                          number(lo[1], "/table/min/1"), number(hi[1], "/table/max/1")};
    if (!(scene.table_extent.width() > 0 && scene.table_extent.depth() > 0)) {
      fail("/table", "empty table extent");
    }
  }
  if (j.contains("placements")) scene.placements = pose_map(j["placements"], "/placements");
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    fail("/placements", e.what());
  }
  return scene;
}

Observation observation_from_json(const Json& j) {
  Observation obs;
  const Json& dets = array(field(j, "detections", ""), "/detections");
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const std::string w = at("/detections", i);
    const int id = integer(field(dets[i], "id", w), at(w, "id"));
    if (obs.detections.count(id)) fail(w, "duplicate detection id " + std::to_string(id));
    obs.detections[id] = pose_from_json(field(dets[i], "pose", w), at(w, "pose"));
    double conf = 1.0;
    if (dets[i].contains("confidence")) conf = number(dets[i]["confidence"], at(w, "confidence"));
    if (conf < 0.0 || conf > 1.0) fail(at(w, "confidence"), "confidence outside [0,1]");
    obs.confidence[id] = conf;
  }
  if (j.contains("false_positives")) {
    const Json& fps = array(j["false_positives"], "/false_positives");
    for (std::size_t i = 0; i < fps.size(); ++i) {
      const std::string w = at("/false_positives", i);
      FalsePositive fp;
      fp.shape = primitive_from_json(field(fps[i], "shape", w), at(w, "shape"));
      fp.pose = pose_from_json(field(fps[i], "pose", w), at(w, "pose"));
      if (fps[i].contains("confidence")) fp.confidence = number(fps[i]["confidence"], at(w, "confidence"));
      obs.false_positives.push_back(fp);
    }
  }
  return obs;
}

Layout layout_from_json(const Json& j) {
  Layout layout;
  layout.pick_poses = pose_map(field(j, "pick_poses", ""), "/pick_poses");
  return layout;
}

Operator operator_from_json(const Json& j, const Catalog& catalog, const std::string& where) {
  const std::string name = text(field(j, "op", where), at(where, "op"));
  const Json& args = array(field(j, "args", where), at(where, "args"));
  auto arg = [&](std::size_t i) {
    return operand_from_json(args[i], catalog, at(at(where, "args"), i));
  };
  auto expect_args = [&](std::size_t n) {
    if (args.size() != n) fail(at(where, "args"), name + " takes " + std::to_string(n) + " arguments");
  };
  Operator op;
  if (name == "PutOn") {
    expect_args(2);
    op = put_on(arg(0), arg(1));
  } else if (name == "PutOnAlongX" || name == "PutOnAlongY") {
    expect_args(3);
    op = name == "PutOnAlongX" ? put_on_along_x(arg(0), arg(1), arg(2))
                               : put_on_along_y(arg(0), arg(1), arg(2));
  } else if (name == "Rotate") {
    expect_args(1);
    op = rotate(arg(0));
  } else {
    fail(at(where, "op"), "unknown operator '" + name + "'");
  }
  if (op.actor == kTable) fail(at(where, "args"), "TABLE cannot be moved");
  return op;
}

OperatorSequence sequence_from_json(const Json& j, const Catalog& catalog,
                                    const std::string& where) {
  OperatorSequence seq;
  const Json& list = array(j, where);
  for (std::size_t i = 0; i < list.size(); ++i) {
    seq.push_back(operator_from_json(list[i], catalog, at(where, i)));
  }
  return seq;
}

PlanResult plan_from_json(const Json& j, const Catalog& catalog) {
  PlanResult plan;
  plan.success = boolean(field(j, "success", ""), "/success");
  plan.reward = number(field(j, "reward", ""), "/reward");
  plan.rollouts_used = integer(field(j, "rollouts_used", ""), "/rollouts_used");
  if (j.contains("mean_reward_per_rollout")) {
    plan.mean_reward_per_rollout = number(j["mean_reward_per_rollout"], "/mean_reward_per_rollout");
  }
  if (j.contains("search_exhausted")) plan.search_exhausted = boolean(j["search_exhausted"], "/search_exhausted");
  if (j.contains("diagnostic")) plan.diagnostic = text(j["diagnostic"], "/diagnostic");
  if (j.contains("place_offset")) plan.place_offset = vec3(j["place_offset"], "/place_offset");
  plan.operator_sequence =
      sequence_from_json(field(j, "operator_sequence", ""), catalog, "/operator_sequence");
  plan.solved_poses = pose_map(field(j, "solved_poses", ""), "/solved_poses");
  const Json& steps = array(field(j, "steps", ""), "/steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string w = at("/steps", i);
    PlanStep s;
    s.id = integer(field(steps[i], "id", w), at(w, "id"));
    s.pick = pose_from_json(field(steps[i], "pick", w), at(w, "pick"));
    s.place = pose_from_json(field(steps[i], "place", w), at(w, "place"));
    if (steps[i].contains("grasp_axis")) {
      const std::string axis = text(steps[i]["grasp_axis"], at(w, "grasp_axis"));
      if (axis != "x" && axis != "y") fail(at(w, "grasp_axis"), "expected \"x\" or \"y\"");
      s.grasp_axis = axis == "x" ? GraspAxis::kX : GraspAxis::kY;
    }
    plan.steps.push_back(s);
  }
  if (j.contains("best_reward_trajectory")) {
    for (const Json& e : array(j["best_reward_trajectory"], "/best_reward_trajectory")) {
      if (!e.is_array() || e.size() != 2) fail("/best_reward_trajectory", "expected [rollout, reward] pairs");
      plan.best_reward_trajectory.emplace_back(e[0].get<int>(), e[1].get<double>());
    }
  }
  return plan;
}

void apply_json(const Json& j, VisionConfig& c, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string w = at(where, key);
    if (key == "camera_dir") c.camera_dir = vec3(value, w);
    else if (key == "occlusion_threshold") c.occlusion_threshold = number(value, w);
    else if (key == "pos_noise_sigma") c.pos_noise_sigma = number(value, w);
    else if (key == "false_positive_rate") c.false_positive_rate = number(value, w);
    else if (key == "confidence_threshold") c.confidence_threshold = number(value, w);
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "forced_hidden") {
      c.forced_hidden.clear();
      const Json& list = array(value, w);
      for (std::size_t i = 0; i < list.size(); ++i) c.forced_hidden.push_back(integer(list[i], at(w, i)));
    } else {
      fail(w, "unknown vision setting");
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

void apply_json(const Json& j, SearchConfig& c, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string w = at(where, key);
    if (key == "exploration") c.exploration = number(value, w);
    else if (key == "reward_mode") {
      const std::string m = text(value, w);
      if (m != "dense" && m != "sparse") fail(w, "expected \"dense\" or \"sparse\"");
      c.reward_mode = m == "dense" ? RewardMode::kDense : RewardMode::kSparse;
    } else if (key == "guided") c.guided = boolean(value, w);
    else if (key == "rollout_budget") c.rollout_budget = integer(value, w);
    else if (key == "epsilon") c.epsilon = number(value, w);
    else if (key == "uct_variant") {
      const std::string v = text(value, w);
      if (v != "standard" && v != "inverted") fail(w, "expected \"standard\" or \"inverted\"");
      c.uct_variant = v == "standard" ? UctVariant::kStandard : UctVariant::kInverted;
    } else if (key == "method") {
      const std::string v = text(value, w);
      if (v != "mcts" && v != "random") fail(w, "expected \"mcts\" or \"random\"");
      c.method = v == "mcts" ? SearchMethod::kMcts : SearchMethod::kRandom;
    } else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "penetration_removal") c.penetration_removal = boolean(value, w);
    else if (key == "max_augmentations") c.max_augmentations = integer(value, w);
    else if (key == "place_offset") c.place_offset = vec3(value, w);
    else fail(w, "unknown search setting");
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  try {
    return Json::parse(content);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, content.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
      if (content[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path.string() + ":" + std::to_string(line) + ":" +
                     std::to_string(col) + ": syntax error");
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  out << std::setw(2) << j << "\n";
}

Scene load_scene(const std::filesystem::path& path) {
  return with_file(path, [&] { return scene_from_json(read_json_file(path)); });
}

Observation load_observation(const std::filesystem::path& path) {
  return with_file(path, [&] { return observation_from_json(read_json_file(path)); });
}

Layout load_layout(const std::filesystem::path& path) {
  return with_file(path, [&] { return layout_from_json(read_json_file(path)); });
}

PlanResult load_plan(const std::filesystem::path& path, const Catalog& catalog) {
  return with_file(path, [&] { return plan_from_json(read_json_file(path), catalog); });
}

}  // namespace asmplan
