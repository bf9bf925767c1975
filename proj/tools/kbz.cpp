// kbz - zero-shot codebook resizing and VQ transmission toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
// error. Every failure prints a single "kbz: error: ..." line on stderr.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kbz/codebook.hpp"
#include "kbz/codec.hpp"
#include "kbz/error.hpp"
#include "kbz/eval.hpp"
#include "kbz/geometry.hpp"
#include "kbz/io_util.hpp"
#include "kbz/resizer.hpp"
#include "kbz/semantic_tree.hpp"

namespace {

constexpr const char* kVersion = "kbz 1.0.0";

int cmd_rank(const std::string& input, const std::string& output) {
  const auto t0 = std::chrono::steady_clock::now();
  const kbz::Codebook parent = kbz::load_kbf(input);
  const kbz::ImportanceRanking ranking = kbz::compute_ranking(parent);
  kbz::save_kbr(output, ranking);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cout << "K=" << parent.size() << " dim=" << parent.dim
            << " root=" << ranking.root() << " wall_time_s="
            << kbz::format_g17(secs) << "\n";
  return 0;
}

int cmd_resize(const std::string& input, const std::string& ranking_path,
               std::size_t size, const std::string& output) {
  const kbz::Codebook parent = kbz::load_kbf(input);
  const kbz::ImportanceRanking ranking = kbz::load_kbr(ranking_path);
  const kbz::Codebook child = kbz::resize(parent, ranking, size);
  kbz::save_kbf(output, child);
  std::cout << "wrote child KB K=" << child.size() << " dim=" << child.dim
            << "\n";
  return 0;
}

int cmd_quantize(const std::string& features, const std::string& kb_path,
                 const std::string& output) {
  const kbz::FeatureGrid grid = kbz::load_kbx(features);
  const kbz::Codebook kb = kbz::load_kbf(kb_path);
  kbz::save_kbi(output, kbz::quantize(grid, kb));
  return 0;
}

int cmd_dequantize(const std::string& indices, const std::string& kb_path,
                   const std::string& output) {
  const kbz::IndexGrid grid = kbz::load_kbi(indices);
  const kbz::Codebook kb = kbz::load_kbf(kb_path);
  kbz::save_kbx(output, kbz::dequantize(grid, kb));
  return 0;
}

int cmd_pack(const std::string& indices, const std::string& output) {
  const kbz::IndexGrid grid = kbz::load_kbi(indices);
  const kbz::Payload payload = kbz::pack(grid);
  kbz::save_kbp(output, payload);
  std::cout << "payload_bits=" << payload.stream.size() * 8
            << " index_bits=" << std::size_t(payload.height) * payload.width *
                                      payload.bits_per_index
            << " bits_per_index=" << unsigned(payload.bits_per_index) << "\n";
  return 0;
}

int cmd_unpack(const std::string& payload_path, const std::string& output) {
  const kbz::Payload payload = kbz::load_kbp(payload_path);
  kbz::save_kbi(output, kbz::unpack(payload));
  return 0;
}

int cmd_tree_export(const std::string& input, const std::string& output,
                    const std::string& format) {
  const kbz::Codebook kb = kbz::load_kbf(input);
  const kbz::PointSet points = kbz::embed_codebook(kb);
  const kbz::SemanticTree tree = kbz::build_mst(points);
  std::ostringstream text;
  if (format == "dot")
    kbz::write_dot(text, tree);
  else
    kbz::write_edge_list(text, tree);
  kbz::write_file_atomic(output, text.str());
  std::cout << "nodes=" << tree.node_count() << " root=" << tree.root
            << " total_weight=" << kbz::format_g17(tree.total_weight()) << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& out_dir,
             unsigned threads) {
  std::ifstream in(config_path);
  if (!in)
    throw kbz::invalid_input("cannot open config file '" + config_path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const kbz::SweepConfig cfg = kbz::parse_sweep_config(buffer.str());

  std::filesystem::create_directories(out_dir);
  const auto records = kbz::run_sweep(cfg, threads, &std::cerr);
  const auto dir = std::filesystem::path(out_dir);
  kbz::write_file_atomic(dir / cfg.records_csv, kbz::records_to_csv(records));
  const std::string summary = kbz::summary_to_csv(records);
  kbz::write_file_atomic(dir / cfg.summary_csv, summary);

  // Zero-shot vs dedicated mean-MSE ratio per K, from the summary rows.
  std::istringstream rows(summary);
  std::string line;
  std::getline(rows, line);  // header
  while (std::getline(rows, line)) {
    if (line.rfind("zero-shot,", 0) != 0) continue;
    std::istringstream fields(line);
    std::string method, k, bits, mean, stddev, ratio;
    std::getline(fields, method, ',');
    std::getline(fields, k, ',');
    std::getline(fields, bits, ',');
    std::getline(fields, mean, ',');
    std::getline(fields, stddev, ',');
    std::getline(fields, ratio, ',');
    std::cout << "K=" << k << " zero-shot/dedicated mean-MSE ratio=" << ratio
              << "\n";
  }
  return 0;
}

int cmd_kb_info(const std::string& input) {
  const kbz::Codebook kb = kbz::load_kbf(input);
  double min_norm = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  for (std::size_t k = 0; k < kb.size(); ++k) {
    double n2 = 0.0;
    for (float x : kb.vec(k)) n2 += double(x) * double(x);
    min_norm = std::min(min_norm, std::sqrt(n2));
    max_norm = std::max(max_norm, std::sqrt(n2));
  }
  std::cout << "K=" << kb.size() << " dim=" << kb.dim
            << " bits_per_index=" << kbz::bits_per_index(kb.size())
            << " min_norm=" << kbz::format_g17(min_norm)
            << " max_norm=" << kbz::format_g17(max_norm)
            << " fingerprint=" << kbz::fingerprint_hex(kb) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot codebook resizing and VQ transmission toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string input, output, ranking_path, kb_path, features, indices, payload;
  std::string config_path, out_dir, format = "edges";
  std::size_t size = 0;
  unsigned threads = 1;

  auto* rank = app.add_subcommand("rank", "Compute an importance ranking (KBR) for a codebook");
  rank->add_option("--input", input, "Parent codebook (KBF)")->required();
  rank->add_option("--output", output, "Ranking file to write (KBR)")->required();

  auto* resize = app.add_subcommand("resize", "Materialize a child codebook of a given size");
  resize->add_option("--input", input, "Parent codebook (KBF)")->required();
  resize->add_option("--ranking", ranking_path, "Ranking file (KBR)")->required();
  resize->add_option("--size", size, "Child codebook size K")->required();
  resize->add_option("--output", output, "Child codebook to write (KBF)")->required();

  auto* quantize = app.add_subcommand("quantize", "Map a feature grid to nearest-codeword indices");
  quantize->add_option("--features", features, "Feature grid (KBX)")->required();
  quantize->add_option("--kb", kb_path, "Codebook (KBF)")->required();
  quantize->add_option("--output", output, "Index grid to write (KBI)")->required();

  auto* dequantize = app.add_subcommand("dequantize", "Look indices back up into feature vectors");
  dequantize->add_option("--indices", indices, "Index grid (KBI)")->required();
  dequantize->add_option("--kb", kb_path, "Codebook (KBF)")->required();
  dequantize->add_option("--output", output, "Feature grid to write (KBX)")->required();

  auto* pack = app.add_subcommand("pack", "Bit-pack an index grid into a wire payload");
  pack->add_option("--indices", indices, "Index grid (KBI)")->required();
  pack->add_option("--output", output, "Payload to write (KBP)")->required();

  auto* unpack = app.add_subcommand("unpack", "Decode a wire payload back into an index grid");
  unpack->add_option("--payload", payload, "Payload (KBP)")->required();
  unpack->add_option("--output", output, "Index grid to write (KBI)")->required();

  auto* tree_export = app.add_subcommand("tree-export", "Export the semantic tree of a codebook");
  tree_export->add_option("--input", input, "Codebook (KBF)")->required();
  tree_export->add_option("--output", output, "Output file")->required();
  tree_export->add_option("--format", format, "edges (default) or dot")
      ->check(CLI::IsMember({"edges", "dot"}));

  auto* eval = app.add_subcommand("eval", "Run a rate-distortion sweep from a config file");
  eval->add_option("--config", config_path, "Sweep config file")->required();
  eval->add_option("--out-dir", out_dir, "Directory for the output CSVs")->required();
  eval->add_option("--threads", threads, "Worker threads over sweep seeds");

  auto* kb_info = app.add_subcommand("kb-info", "Print codebook facts and fingerprint");
  kb_info->add_option("--input", input, "Codebook (KBF)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rank->parsed()) return cmd_rank(input, output);
    if (resize->parsed()) return cmd_resize(input, ranking_path, size, output);
    if (quantize->parsed()) return cmd_quantize(features, kb_path, output);
    if (dequantize->parsed()) return cmd_dequantize(indices, kb_path, output);
    if (pack->parsed()) return cmd_pack(indices, output);
    if (unpack->parsed()) return cmd_unpack(payload, output);
    if (tree_export->parsed()) return cmd_tree_export(input, output, format);
    if (eval->parsed()) return cmd_eval(config_path, out_dir, threads);
    if (kb_info->parsed()) return cmd_kb_info(input);
    std::cerr << "kbz: error: no subcommand\n";
    return 1;
  } catch (const kbz::invalid_input& e) {
    std::cerr << "kbz: error: " << e.what() << "\n";
    return 1;
  } catch (const kbz::decode_error& e) {
    std::cerr << "kbz: error: " << e.what() << "\n";
    return 2;
  } catch (const kbz::stale_ranking_error& e) {
    std::cerr << "kbz: error: " << e.what() << "\n";
    return 2;
  } catch (const kbz::domain_error& e) {
    std::cerr << "kbz: error: " << e.what() << "\n";
    return 2;
  } catch (const kbz::io_error& e) {
    std::cerr << "kbz: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kbz: error: internal: " << e.what() << "\n";
    return 3;
  }
}
