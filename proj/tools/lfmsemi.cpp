// lfmsemi: classify, normalize and embed linear fractional maps of the ball.
#include <fstream>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>

#include "lfmsemi/pipeline.hpp"

using namespace lfmsemi;

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CVector parse_point(const std::string& text, Index dim) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("--z0: ") + e.what());
  }
  if (!j.is_array() || Index(j.size()) != dim) {
    throw Error(ErrorKind::Parse, "--z0 must be a list of " + std::to_string(dim) + " [re, im] pairs");
  }
  CVector z(dim);
  for (Index i = 0; i < dim; ++i) {
    const json& e = j[std::size_t(i)];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw Error(ErrorKind::Parse, "--z0 entry " + std::to_string(i) + " must be [re, im]");
    }
    z(i) = cplx(e[0].get<double>(), e[1].get<double>());
  }
  return z;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Parse, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear fractional self-maps of the unit ball: classification, normal forms, semigroup embedding"};
  app.require_subcommand(1);
  app.fallthrough();

  PipelineOptions opt;
  std::string output, input = "-", csv, z0_text;
  std::vector<double> t_grid;
  app.add_option("--seed", opt.seed, "sampler seed");
  app.add_option("--tol-profile", opt.tol_profile, "tolerance profile")->check(CLI::IsMember({"default", "strict"}));
  app.add_option("--output", output, "write the machine-readable report (JSON) here");
  app.add_option("--threads", opt.threads, "worker threads for the sampling checks")->check(CLI::Range(1u, 256u));
  app.add_option("--count", opt.count, "sample points per check")->check(CLI::Range(std::size_t(1), std::size_t(100000)));

  struct Sub {
    const char* name;
    const char* help;
    PipelineStage last;
  };
  const Sub subs[] = {{"classify", "elliptic / parabolic / hyperbolic with fixed-point data", PipelineStage::Classify},
                      {"normalize", "reduce to a normal form", PipelineStage::Normalize},
                      {"embed", "decide the embedding criterion", PipelineStage::Embed},
                      {"semigroup", "build the semigroup and sample a trajectory", PipelineStage::Build},
                      {"verify", "build and verify the semigroup", PipelineStage::Verify},
                      {"report", "full pipeline with trajectory samples", PipelineStage::Verify}};
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    c->add_option("spec", input, "map specification file, - for stdin");
    if (std::string(s.name) == "semigroup" || std::string(s.name) == "report") {
      c->add_option("--t", t_grid, "comma separated t grid")->delimiter(',');
      c->add_option("--z0", z0_text, "start point as a JSON list of [re, im] pairs");
      c->add_option("--csv", csv, "write the trajectory as CSV");
    }
    cmds.push_back(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors are input errors
    return app.exit(e) == 0 ? 0 : 3;
  }

  std::size_t which = 0;
  for (std::size_t i = 0; i < cmds.size(); ++i)
    if (cmds[i]->parsed()) which = i;
  opt.last = subs[which].last;
  const bool wants_trajectory = std::string(subs[which].name) == "semigroup" || std::string(subs[which].name) == "report";

  PipelineResult res;
  try {
    const MapSpec spec = parse_map_spec(read_input(input));
    if (wants_trajectory) {
      opt.t_grid = t_grid;
      if (!z0_text.empty()) {
        opt.z0 = parse_point(z0_text, spec.dimension);
      } else {
        CVector z = CVector::Zero(spec.dimension);
        z(0) = 0.5;
        opt.z0 = z;
      }
    }
    res = run_pipeline(spec, opt);
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  }

  std::cout << summary_text(res.report);
  try {
    if (!output.empty()) write_file(output, dump_report(res.report));
    if (csv.empty() && res.family && std::string(subs[which].name) == "semigroup") {
      std::cout << trajectory_csv(res.trajectory, res.family->dim());
    } else if (!csv.empty()) {
      if (!res.family) {
        std::cerr << "no semigroup was built; no trajectory written\n";
      } else {
        write_file(csv, trajectory_csv(res.trajectory, res.family->dim()));
      }
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  return res.report.exit_code;
}
