#include "beamprint/app/recipes.hpp"

#include <stdexcept>

#include "beamprint/errors.hpp"

namespace beamprint::app {

using scene::MainClass;
using scene::SubBehavior;

std::string to_string(Grouping g) {
  switch (g) {
    case Grouping::FiveClass: return "five_class";
    case Grouping::FastSlow: return "fast_slow";
    case Grouping::PedBike: return "ped_bike";
    case Grouping::CrossNoncross: return "cross_noncross";
    case Grouping::ClassSubset: return "class_subset";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Kmeans: return "kmeans";
    case Method::Tsne: return "tsne";
    case Method::ExtraTrees: return "extra_trees";
    case Method::AdaBoost: return "adaboost";
  }
  return "?";
}

void check_token(const std::string& token) {
  static const char* known[] = {"ped", "ped-nc", "ped-cr", "bike", "car", "bus", "mc"};
  for (const char* k : known) {
    if (token == k) return;
  }
  throw std::invalid_argument("unknown class token '" + token + "'");
}

bool token_matches(const std::string& token, const scene::UeClass& cls) {
  const bool ped = cls.main == MainClass::Pedestrian;
  if (token == "ped") return ped;
  if (token == "ped-nc") return ped && cls.sub == SubBehavior::None;
  if (token == "ped-cr") return ped && cls.sub == SubBehavior::CrossesStreet;
  if (token == "bike") return cls.main == MainClass::Bicycle;
  if (token == "car") return cls.main == MainClass::Car;
  if (token == "bus") return cls.main == MainClass::Bus;
  if (token == "mc") return cls.main == MainClass::Motorcycle;
  check_token(token);
  return false;
}

std::optional<int> ExperimentRecipe::label_of(const scene::UeClass& cls) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const auto& token : labels[i].members) {
      if (token_matches(token, cls)) return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

std::vector<std::string> ExperimentRecipe::class_names() const {
  std::vector<std::string> names;
  for (const auto& l : labels) names.push_back(l.name);
  return names;
}

namespace {

ExperimentRecipe base(std::string name, std::string description, Grouping grouping,
                      std::vector<LabelGroup> labels, Method method) {
  ExperimentRecipe r;
  r.name = std::move(name);
  r.description = std::move(description);
  r.grouping = grouping;
  r.labels = std::move(labels);
  r.method = method;
  r.population = {{MainClass::Pedestrian, 424},
                  {MainClass::Bicycle, 165},
                  {MainClass::Car, 320},
                  {MainClass::Bus, 180},
                  {MainClass::Motorcycle, 130}};
  r.crossing_count = 242;
  return r;
}

ExperimentRecipe extra_trees(std::string name, std::string description,
                             std::vector<LabelGroup> labels, double reference, double ceiling) {
  ExperimentRecipe r =
      base(std::move(name), std::move(description), Grouping::ClassSubset, std::move(labels),
           Method::ExtraTrees);
  r.reference_rate = reference;
  r.max_rate = ceiling;
  return r;
}

std::vector<ExperimentRecipe> make_recipes() {
  std::vector<ExperimentRecipe> out;

  ExperimentRecipe fig3 = base("fig3", "K-means over all five classes, elbow curve over K = 1..10",
                               Grouping::FiveClass,
                               {{"pedestrian", {"ped"}},
                                {"bicycle", {"bike"}},
                                {"car", {"car"}},
                                {"bus", {"bus"}},
                                {"motorcycle", {"mc"}}},
                               Method::Kmeans);
  fig3.k = 5;
  fig3.elbow = true;
  out.push_back(fig3);

  ExperimentRecipe fig4 = base("fig4", "K-means K = 2, fast (car, bus, motorcycle) vs slow movers",
                               Grouping::FastSlow,
                               {{"fast", {"car", "bus", "mc"}}, {"slow", {"ped", "bike"}}},
                               Method::Kmeans);
  out.push_back(fig4);

  ExperimentRecipe fig5 = base("fig5", "K-means K = 2 on slow movers, bicycles vs pedestrians",
                               Grouping::PedBike, {{"bicycle", {"bike"}}, {"pedestrian", {"ped"}}},
                               Method::Kmeans);
  out.push_back(fig5);

  ExperimentRecipe fig6 = base("fig6", "K-means K = 2 on pedestrians, crossing vs non-crossing",
                               Grouping::CrossNoncross,
                               {{"crossing", {"ped-cr"}}, {"non-crossing", {"ped-nc"}}},
                               Method::Kmeans);
  out.push_back(fig6);

  ExperimentRecipe fig7 = base("fig7", "t-SNE embedding of pedestrians, crossing vs non-crossing",
                               Grouping::CrossNoncross,
                               {{"crossing", {"ped-cr"}}, {"non-crossing", {"ped-nc"}}},
                               Method::Tsne);
  out.push_back(fig7);

  out.push_back(extra_trees("table1_extratrees_pednc",
                            "Extra trees on non-crossing pedestrians, cars and motorcycles",
                            {{"ped-nc", {"ped-nc"}}, {"car", {"car"}}, {"mc", {"mc"}}}, 0.018,
                            0.10));
  out.push_back(extra_trees("table1_extratrees_pedcr",
                            "Extra trees on crossing pedestrians, cars and motorcycles",
                            {{"ped-cr", {"ped-cr"}}, {"car", {"car"}}, {"mc", {"mc"}}}, 0.022,
                            0.12));
  out.push_back(extra_trees("table1_extratrees_ped",
                            "Extra trees on all pedestrians, cars and motorcycles",
                            {{"ped", {"ped"}}, {"car", {"car"}}, {"mc", {"mc"}}}, 0.052, 0.12));

  ExperimentRecipe ada = base("table1_adaboost", "AdaBoost on all pedestrians, cars and motorcycles",
                              Grouping::ClassSubset,
                              {{"ped", {"ped"}}, {"car", {"car"}}, {"mc", {"mc"}}},
                              Method::AdaBoost);
  ada.reference_rate = 0.081;
  ada.max_rate = 0.18;
  out.push_back(ada);
  return out;
}

}  // namespace

const std::vector<ExperimentRecipe>& builtin_recipes() {
  static const std::vector<ExperimentRecipe> recipes = make_recipes();
  return recipes;
}

const ExperimentRecipe& find_recipe(const std::string& name) {
  for (const auto& r : builtin_recipes()) {
    if (r.name == name) return r;
  }
  std::string names;
  for (const auto& r : builtin_recipes()) names += (names.empty() ? "" : ", ") + r.name;
  throw ConfigError("unknown recipe '" + name + "' (known: " + names + ")");
}

}  // namespace beamprint::app
