#include <iostream>

#include <CLI11.hpp>

#include "rmatlas/error.hpp"
#include "rmatlas_cli/commands.hpp"

namespace rmatlas::cli {

int run(int argc, char** argv) {
  CLI::App app{"rmatlas: Riemannian connectome metrics, Ebin geodesics, registration and atlases"};
  app.require_subcommand(1);
  nlohmann::json summary;
  std::function<nlohmann::json()> action;

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Write synthetic cubic-family tensor fields, masks and vector fields");
  s->add_option("--config", synth.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  s->add_option("--out", synth.out_dir, "Output directory (default: config output.directory)");
  s->callback([&] { action = [&] { return cmd_synth(synth); }; });

  EstimateOptions est;
  auto* e = app.add_subcommand("estimate-metric", "Solve for the conformal factor of a tensor image");
  e->add_option("--tensor", est.tensor, "Diffusion tensor field (MTF)")->required()->check(CLI::ExistingFile);
  e->add_option("--mask", est.mask, "Mask (MTF); default: whole grid")->check(CLI::ExistingFile);
  e->add_option("--out", est.out_prefix, "Output prefix for _g_alpha/_g_tilde/_alpha files");
  e->add_option("--tolerance", est.tolerance, "CG relative tolerance")->check(CLI::PositiveNumber);
  e->callback([&] { action = [&] { return cmd_estimate_metric(est); }; });

  CurveOptions geo;
  auto* g = app.add_subcommand("geodesic", "Shoot a geodesic of a metric field");
  g->add_option("--metric", geo.field, "Metric field (MTF)")->required()->check(CLI::ExistingFile);
  g->add_option("--mask", geo.mask, "Mask (MTF)")->check(CLI::ExistingFile);
  g->add_option("--seed", geo.seed, "Seed point x,y[,z]")->required();
  g->add_option("--direction", geo.direction, "Initial direction; default: principal direction");
  g->add_option("--max-length", geo.max_length, "Maximum Euclidean length")->check(CLI::PositiveNumber);
  g->add_option("--dt", geo.dt, "RK4 step")->check(CLI::PositiveNumber);
  g->add_flag("--both-ways", geo.both_ways, "Trace forward and backward from the seed");
  g->add_option("--out", geo.out, "Write the curve as JSON");
  g->callback([&] { action = [&] { return cmd_geodesic(geo); }; });

  CurveOptions ic;
  auto* c = app.add_subcommand("integral-curve", "Integrate a vector field from a seed");
  c->add_option("--vector", ic.field, "Vector field (MTF)")->required()->check(CLI::ExistingFile);
  c->add_option("--mask", ic.mask, "Mask (MTF)")->check(CLI::ExistingFile);
  c->add_option("--seed", ic.seed, "Seed point x,y[,z]")->required();
  c->add_option("--direction", ic.direction, "Orientation hint");
  c->add_option("--max-length", ic.max_length, "Maximum Euclidean length")->check(CLI::PositiveNumber);
  c->add_option("--dt", ic.dt, "RK4 step")->check(CLI::PositiveNumber);
  c->add_flag("--both-ways", ic.both_ways, "Trace forward and backward from the seed");
  c->add_option("--out", ic.out, "Write the curve as JSON");
  c->callback([&] { action = [&] { return cmd_integral_curve(ic); }; });

  DistanceOptions dist;
  auto* d = app.add_subcommand("distance", "Ebin distance between two metric fields");
  d->add_option("first", dist.a, "First metric (MTF)")->required()->check(CLI::ExistingFile);
  d->add_option("second", dist.b, "Second metric (MTF)")->required()->check(CLI::ExistingFile);
  d->add_option("--mask", dist.mask, "Mask (MTF); default: whole grid")->check(CLI::ExistingFile);
  d->callback([&] { action = [&] { return cmd_distance(dist); }; });

  MeanOptions mean;
  auto* m = app.add_subcommand("mean", "Frechet mean by geodesic marching (inputs taken in lexical order)");
  m->add_option("inputs", mean.inputs, "Metric fields (MTF)")->required()->check(CLI::ExistingFile);
  m->add_option("--mask", mean.mask, "Mask (MTF)")->check(CLI::ExistingFile);
  m->add_option("--out", mean.out, "Output metric (MTF)")->required();
  m->callback([&] { action = [&] { return cmd_mean(mean); }; });

  RegisterOptions reg;
  auto* r = app.add_subcommand("register", "Match a moving metric onto a fixed one");
  r->add_option("--fixed", reg.fixed, "Fixed metric g0 (MTF)")->required()->check(CLI::ExistingFile);
  r->add_option("--moving", reg.moving, "Moving metric g1 (MTF)")->required()->check(CLI::ExistingFile);
  r->add_option("--mask", reg.mask, "Mask (MTF)")->check(CLI::ExistingFile);
  r->add_option("--config", reg.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  r->add_option("--max-iter", reg.max_iter, "Override registration.max_iter")->check(CLI::NonNegativeNumber);
  r->add_option("--out", reg.out, "Output displacement (MTF)")->required();
  r->callback([&] { action = [&] { return cmd_register(reg); }; });

  AtlasOptions atlas;
  auto* a = app.add_subcommand("atlas", "Build a Frechet-mean atlas (synthetic subjects unless --metric is given)");
  a->add_option("--config", atlas.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  a->add_option("--metric", atlas.metrics, "Subject metric (MTF), repeatable")->check(CLI::ExistingFile);
  a->add_option("--mask", atlas.masks, "Subject mask (MTF), one per --metric")->check(CLI::ExistingFile);
  a->add_option("--out", atlas.out_dir, "Output directory (default: config output.directory)");
  a->add_option("--outer-iterations", atlas.outer_iterations, "Override atlas.outer_iterations")
      ->check(CLI::NonNegativeNumber);
  a->callback([&] { action = [&] { return cmd_atlas(atlas); }; });

  std::string info_path;
  auto* i = app.add_subcommand("info", "Print the header and value range of an MTF file");
  i->add_option("file", info_path, "MTF file")->required()->check(CLI::ExistingFile);
  i->callback([&] { action = [&] { return cmd_info(info_path); }; });

  RenderCmdOptions ren;
  auto* v = app.add_subcommand("render", "Draw tensor glyphs, the mask outline and curves to SVG");
  v->add_option("--mask", ren.mask, "Mask (MTF)")->required()->check(CLI::ExistingFile);
  auto* t_opt = v->add_option("--tensor", ren.tensor, "Tensor field drawn as glyphs")->check(CLI::ExistingFile);
  v->add_option("--metric", ren.metric, "Metric field; glyphs show its inverse")
      ->check(CLI::ExistingFile)
      ->excludes(t_opt);
  v->add_option("--curve", ren.curves, "Curve JSON file, repeatable")->check(CLI::ExistingFile);
  v->add_option("--title", ren.title, "Figure title");
  v->add_option("--out", ren.out, "Output SVG")->required();
  v->callback([&] { action = [&] { return cmd_render(ren); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  try {
    summary = action();
  } catch (const std::exception& err) {
    std::string msg = err.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace rmatlas::cli
