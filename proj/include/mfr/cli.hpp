/*
 * Copyright (c) 2026 The MFR Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mfr/attention.hpp"
#include "mfr/catalog.hpp"
#include "mfr/chunker.hpp"
#include "mfr/diffusion.hpp"
#include "mfr/http.hpp"
#include "mfr/image.hpp"
#include "mfr/palettizer.hpp"
#include "mfr/service.hpp"
#include "mfr/toy_models.hpp"
#include "mfr/weight_store.hpp"

namespace mfr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline fs::path default_data_dir() {
  if (const char* home = std::getenv("MFR_HOME"); home && *home) return home;
  return "mfr_data";
}

struct Globals {
  std::string data_dir = default_data_dir().string();
  std::uint64_t seed = 0;
  bool quiet = false;
  bool json_out = false;
};

inline json violations_json(const std::vector<Violation>& v) {
  json out = json::array();
  for (const auto& x : v) {
    out.push_back({{"code", std::string(code_name(x.code))}, {"tensor", x.tensor}, {"message", x.message}});
  }
  return out;
}

inline json garment_json(const GarmentRecord& g) { return to_json(g); }

/// Runs one command line. stdout-style data goes to `out`, diagnostics to
/// `err`. Returns 0 on success, 1 on operation failure, 2 on usage errors.
inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mfr: on-device try-on model toolkit (palettize, chunk, generate, serve)", "mfr"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--data-dir", g.data_dir, "Data root (default $MFR_HOME or ./mfr_data)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_flag("--quiet", g.quiet, "Suppress non-essential output");
  app.add_flag("--json", g.json_out, "Machine-readable canonical JSON output");

  std::function<void()> action;

  // compress
  auto* compress = app.add_subcommand("compress", "Palettize eligible tensors of an artifact");
  PalettizationConfig pcfg;
  std::string c_in, c_out, c_strategy = "lloyd";
  compress->add_option("--bits", pcfg.n_bits, "Palette bits per weight")->check(CLI::Range(1, 8));
  compress->add_option("--in", c_in, "Input artifact")->required();
  compress->add_option("--out", c_out, "Output artifact")->required();
  compress->add_option("--strategy", c_strategy, "Clustering for tensors above 4096 elements")
      ->check(CLI::IsMember({"lloyd", "exact"}));
  compress->add_option("--min-elements", pcfg.min_elements, "Tensors smaller than this stay raw");
  compress->callback([&] {
    action = [&] {
      pcfg.strategy = c_strategy == "exact" ? Strategy::exact_dp : Strategy::lloyd;
      const auto report = compress_model(c_in, c_out, pcfg);
      if (g.json_out) {
        out << canonical_json(to_json(report)) << "\n";
      } else if (!g.quiet) {
        out << format_table(report);
      }
    };
  });

  // chunk
  auto* chunk = app.add_subcommand("chunk", "Split an artifact into balanced chunk files");
  std::size_t k_n = 2;
  std::string k_in, k_dir;
  chunk->add_option("--n", k_n, "Number of chunks")->required();
  chunk->add_option("--in", k_in, "Input artifact")->required();
  chunk->add_option("--out-dir", k_dir, "Output directory")->required();
  chunk->callback([&] {
    action = [&] {
      const auto m = write_chunks(k_in, k_dir, k_n);
      if (g.json_out) {
        out << canonical_json(to_json(m)) << "\n";
      } else if (!g.quiet) {
        for (const auto& c : m.chunks) {
          out << c.file << "  " << c.bytes << " B  [" << c.first_tensor << " .. " << c.last_tensor << "]  "
              << c.sha256 << "\n";
        }
        out << (fs::path(k_dir) / manifest_file_name(m.model_id)).string() << "\n";
      }
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "Check an artifact (or chunk manifest) for format violations");
  std::string v_path;
  verify->add_option("path", v_path, "Artifact or .manifest.json")->required();
  verify->callback([&] {
    action = [&] {
      std::vector<Violation> report;
      if (is_manifest_path(v_path)) {
        try {
          load_chunked(v_path);
        } catch (const Error& e) {
          report.push_back({e.code(), "", e.what()});
        }
      } else {
        report = verify_artifact(v_path);
      }
      if (g.json_out) {
        out << canonical_json({{"ok", report.empty()}, {"violations", violations_json(report)}}) << "\n";
      } else if (!g.quiet || !report.empty()) {
        if (report.empty()) out << "ok\n";
        for (const auto& v : report) out << code_name(v.code) << ": " << v.message << "\n";
      }
      if (!report.empty()) {
        fail(report.front().code, std::to_string(report.size()) + " violation(s) in " + v_path);
      }
    };
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Size report of an artifact against its dense form");
  std::string r_path;
  report_cmd->add_option("path", r_path, "Artifact")->required();
  report_cmd->callback([&] {
    action = [&] {
      const auto r = size_report(r_path);
      if (g.json_out) {
        out << canonical_json(to_json(r)) << "\n";
      } else {
        out << format_table(r);
      }
    };
  });

  // bench-attn
  auto* bench = app.add_subcommand("bench-attn", "Compare baseline and split-einsum attention");
  bench->set_help_flag("--help", "Print this help message and exit");
  AttentionShape ashape{1, 8, 64, 40};
  int trials = 5;
  std::size_t head_chunk = 1;
  bench->add_option("--b", ashape.batch, "Batch");
  bench->add_option("--h", ashape.heads, "Heads");
  bench->add_option("--s", ashape.seq, "Sequence length");
  bench->add_option("--d", ashape.head_dim, "Head dimension");
  bench->add_option("--trials", trials, "Timing trials");
  bench->add_option("--chunk", head_chunk, "Heads per chunk in the split kernel");
  bench->callback([&] {
    action = [&] {
      const auto c = compare_kernels(ashape, trials, g.seed, head_chunk);
      if (g.json_out) {
        out << canonical_json(to_json(c)) << "\n";
      } else {
        out << "shape (B,H,S,D) = (" << c.shape.batch << "," << c.shape.heads << "," << c.shape.seq << ","
            << c.shape.head_dim << ")  trials=" << c.trials << "\n"
            << "max_abs_diff          " << c.max_abs_diff << "\n"
            << "baseline median ms    " << c.baseline_median_ms << "\n"
            << "split-einsum median ms " << c.split_einsum_median_ms << "\n";
      }
    };
  });

  // generate
  auto* generate = app.add_subcommand("generate", "Inpaint a garment into the masked region of an image");
  std::string gen_garment, gen_image, gen_mask, gen_out;
  GenerationParams gparams;
  std::optional<std::uint64_t> gen_seed;
  generate->add_option("--garment", gen_garment, "Garment id")->required();
  generate->add_option("--image", gen_image, "Input RGB PNG")->required();
  generate->add_option("--mask", gen_mask, "Grayscale mask PNG (255 = regenerate)")->required();
  generate->add_option("--out", gen_out, "Output PNG")->required();
  generate->add_option("--steps", gparams.steps, "Denoising steps");
  generate->add_option("--guidance", gparams.guidance, "Guidance weight");
  generate->add_option("--seed", gen_seed, "Seed (defaults to the global --seed)");
  generate->callback([&] {
    action = [&] {
      gparams.seed = gen_seed.value_or(g.seed);
      gparams.validate();
      Catalog catalog(g.data_dir);
      const GarmentRecord rec = catalog.get(gen_garment);
      require(rec.downloaded, ErrorCode::model_unavailable, "model not available; call download first");
      const Image image = read_png(gen_image, 3);
      const Image mask = read_png(gen_mask, 1);
      check_mask(mask, image);
      const ToyDenoiser model = load_toy_denoiser(catalog.artifact_path(rec)).resized(image.width, image.height);
      const Image result =
          inpaint_generate(image, mask, model, encode_prompt(catalog.prompt_for(gen_garment)), gparams);
      write_png(gen_out, result);
      if (g.json_out) {
        out << canonical_json({{"out", gen_out},
                               {"garment_id", gen_garment},
                               {"prompt", catalog.prompt_for(gen_garment)},
                               {"steps", gparams.steps},
                               {"guidance", gparams.guidance},
                               {"seed", gparams.seed}})
            << "\n";
      } else if (!g.quiet) {
        out << "wrote " << gen_out << " (" << catalog.prompt_for(gen_garment) << ")\n";
      }
    };
  });

  // erase
  auto* erase = app.add_subcommand("erase", "Blend the original back in under an eraser mask");
  std::string e_orig, e_cur, e_mask, e_out;
  erase->add_option("--original", e_orig, "Original RGB PNG")->required();
  erase->add_option("--current", e_cur, "Current result PNG")->required();
  erase->add_option("--mask", e_mask, "Eraser mask PNG (255 = restore)")->required();
  erase->add_option("--out", e_out, "Output PNG")->required();
  erase->callback([&] {
    action = [&] {
      const Image blended = erase_blend(read_png(e_orig, 3), read_png(e_cur, 3), read_png(e_mask, 1));
      write_png(e_out, blended);
      if (g.json_out) {
        out << canonical_json({{"out", e_out}}) << "\n";
      } else if (!g.quiet) {
        out << "wrote " << e_out << "\n";
      }
    };
  });

  // catalog
  auto* catalog_cmd = app.add_subcommand("catalog", "Manage the garment catalog");
  catalog_cmd->require_subcommand(1);

  auto* cat_add = catalog_cmd->add_subcommand("add", "Register a garment, or --fixtures for the demo set");
  bool fixtures = false;
  GarmentRecord rec;
  cat_add->add_flag("--fixtures", fixtures, "Write the fixture garments and a sample model");
  cat_add->add_option("--id", rec.garment_id, "Garment id");
  cat_add->add_option("--name", rec.display_name, "Display name");
  cat_add->add_option("--class", rec.garment_class, "Garment class, e.g. shirt");
  cat_add->add_option("--token", rec.identifier_token, "Identifier token, e.g. rtr");
  cat_add->add_option("--artifact", rec.artifact, "Artifact path relative to the data dir");
  cat_add->add_option("--size", rec.size_bytes, "Download size in bytes (default: bytes on disk)");
  cat_add->add_option("--interest", rec.interest_score, "Interest score");
  cat_add->add_flag("--downloaded", rec.downloaded, "Mark as already downloaded");
  cat_add->callback([&] {
    action = [&] {
      std::vector<std::string> added;
      if (fixtures) {
        const Catalog c = make_fixture_catalog(g.data_dir);
        make_sample_model(fs::path(g.data_dir) / "sample_model.mfrw");
        for (const auto& r : c.list_garments()) added.push_back(r.garment_id);
      } else {
        require(!rec.garment_id.empty() && !rec.garment_class.empty() && !rec.identifier_token.empty() &&
                    !rec.artifact.empty(),
                ErrorCode::invalid_argument, "catalog add needs --id, --class, --token and --artifact (or --fixtures)");
        Catalog c(g.data_dir);
        c.register_garment(rec);
        added.push_back(rec.garment_id);
      }
      if (g.json_out) {
        out << canonical_json({{"added", added}}) << "\n";
      } else if (!g.quiet) {
        for (const auto& id : added) out << "added " << id << "\n";
      }
    };
  });

  auto* cat_list = catalog_cmd->add_subcommand("list", "List garments");
  std::string list_class;
  cat_list->add_option("--class", list_class, "Only this garment class");
  cat_list->callback([&] {
    action = [&] {
      const Catalog c(g.data_dir);
      const auto rows =
          c.list_garments(list_class.empty() ? std::nullopt : std::optional<std::string>(list_class));
      if (g.json_out) {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(garment_json(r));
        out << canonical_json(arr) << "\n";
      } else {
        for (const auto& r : rows) {
          out << r.garment_id << "\t" << r.display_name << "\t" << r.garment_class << "\t"
              << make_prompt(r.identifier_token, r.garment_class) << "\t" << r.size_bytes << " B\t"
              << (r.downloaded ? "downloaded" : "remote") << "\n";
        }
      }
    };
  });

  auto* cat_plan = catalog_cmd->add_subcommand("plan", "Choose garments to prefetch within a byte budget");
  std::uint64_t budget = 0;
  cat_plan->add_option("--budget", budget, "Budget in bytes")->required();
  cat_plan->callback([&] {
    action = [&] {
      const Catalog c(g.data_dir);
      const auto ids = c.plan_downloads(budget);
      if (g.json_out) {
        out << canonical_json({{"budget_bytes", budget}, {"garment_ids", ids}}) << "\n";
      } else {
        for (const auto& id : ids) out << id << "\n";
      }
    };
  });

  auto* cat_download = catalog_cmd->add_subcommand("download", "Verify a garment's files and mark it downloaded");
  std::string dl_id;
  cat_download->add_option("id", dl_id, "Garment id")->required();
  cat_download->callback([&] {
    action = [&] {
      Catalog c(g.data_dir);
      c.mark_downloaded(dl_id);
      if (g.json_out) {
        out << canonical_json({{"downloaded", true}, {"garment_id", dl_id}}) << "\n";
      } else if (!g.quiet) {
        out << "downloaded " << dl_id << "\n";
      }
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP try-on service");
  int port = 8080;
  std::string bind = "127.0.0.1";
  std::string static_dir;
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--bind", bind, "Bind address (loopback unless set explicitly)");
  serve->add_option("--static", static_dir, "Directory of browser assets to serve at /");
  serve->callback([&] {
    action = [&] {
      Catalog c(g.data_dir);
      TryOnService service(c, fs::path(g.data_dir) / "sessions");
      httplib::Server server;
      install_routes(server, service,
                     static_dir.empty() ? std::nullopt : std::optional<fs::path>(fs::path(static_dir)));
      if (!g.quiet) err << "listening on http://" << bind << ":" << port << std::endl;
      require(server.listen(bind, port), ErrorCode::io, "cannot listen on " + bind + ":" + std::to_string(port));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (!action) {
    err << app.help();
    return kExitUsage;
  }
  try {
    action();
  } catch (const Error& e) {
    err << "error: " << code_name(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace mfr::cli
