// Copyright 2026 The wincodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// wincodec command-line tool: train, compress, decompress, eval, rd-plot,
// synth, info. Exit codes: 0 ok, 2 bad arguments, 3 I/O, 4 format/version,
// 5 numeric failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wincodec/bitstream.hpp"
#include "wincodec/checkpoint.hpp"
#include "wincodec/codec.hpp"
#include "wincodec/error.hpp"
#include "wincodec/image.hpp"
#include "wincodec/metrics.hpp"
#include "wincodec/training.hpp"

namespace fs = std::filesystem;
using namespace wincodec;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return 2;
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kFormat:
      return 4;
    case ErrorKind::kNumeric:
      return 5;
  }
  return 5;
}

std::string read_text(const fs::path& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<uint8_t>(text.begin(), text.end()));
}

// WINCODEC_THREADS caps parallelism; default is the hardware concurrency.
unsigned worker_count(size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WINCODEC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidArgument, std::string("WINCODEC_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return static_cast<unsigned>(std::min<size_t>(n, std::max<size_t>(jobs, 1)));
}

template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
  const unsigned workers = worker_count(n);
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// train

// Model keys go to ModelConfig; the rest configure the optimizer loop.
struct TrainSettings {
  ModelConfig model;
  TrainConfig train;
  int64_t log_every = 50;

  TrainSettings() {
    model.lambda = train.lambda;
    model.metric = train.metric;
    model.seed = train.seed;
  }

  bool set(const std::string& key, const std::string& value) {
    if (key == "lambda") {
      model.set(key, value);
      train.lambda = model.lambda;
      return true;
    }
    if (key == "metric") {
      model.set(key, value);
      train.metric = model.metric;
      return true;
    }
    if (key == "seed") {
      model.set(key, value);
      train.seed = model.seed;
      return true;
    }
    if (model.set(key, value)) return true;
    try {
      if (key == "steps") train.steps = std::stoll(value);
      else if (key == "batch") train.batch = std::stoll(value);
      else if (key == "crop") train.crop = std::stoll(value);
      else if (key == "lr") train.lr = std::stod(value);
      else if (key == "grad_clip") train.grad_clip = std::stod(value);
      else if (key == "first_milestone") train.first_milestone = std::stod(value);
      else if (key == "second_milestone") train.second_milestone = std::stod(value);
      else if (key == "log_every") log_every = std::stoll(value);
      else return false;
    } catch (const std::logic_error&) {
      fail(ErrorKind::kInvalidArgument, "config: bad value '" + value + "' for " + key);
    }
    return true;
  }

  std::string to_text() const {
    std::ostringstream out;
    out << model.to_text();
    out.precision(17);
    out << "steps=" << train.steps << "\nbatch=" << train.batch << "\ncrop=" << train.crop << "\nlr=" << train.lr
        << "\ngrad_clip=" << train.grad_clip << "\nfirst_milestone=" << train.first_milestone
        << "\nsecond_milestone=" << train.second_milestone << "\nlog_every=" << log_every << "\n";
    return out.str();
  }

  void load_file(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      line.erase(0, line.find_first_not_of(" \t"));
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        fail(ErrorKind::kInvalidArgument, path.string() + ":" + std::to_string(n) + ": expected key=value");
      std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
      value.erase(0, value.find_first_not_of(" \t"));
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r')) value.pop_back();
      if (!set(key, value))
        fail(ErrorKind::kInvalidArgument, path.string() + ":" + std::to_string(n) + ": unknown key '" + key + "'");
    }
  }
};

struct TrainArgs {
  std::string data, out, log, config;
  // Flag values are kept as text and applied over the config file.
  std::map<std::string, std::string> flags;
  bool show_config = false;
};

void add_train(CLI::App& app, TrainArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("train", "Train a codec on a directory of PPM images");
  cmd->add_option("--data", a.data, "Directory of .ppm training images");
  cmd->add_option("--out", a.out, "Checkpoint to write");
  cmd->add_option("--log", a.log, "Training log (default: <out>.log)");
  cmd->add_option("--config", a.config, "key=value config file (flags override it)");
  cmd->add_flag("--show-config", a.show_config, "Print the effective configuration and exit");
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Flag flags[] = {
      {"--arch", "arch", "cnn | stf"},
      {"--wam", "cnn.wam", "CNN attention: on | off | nlam"},
      {"--lambda", "lambda", "Rate-distortion trade-off"},
      {"--metric", "metric", "mse | ms-ssim"},
      {"--steps", "steps", "Optimizer steps"},
      {"--batch", "batch", "Crops per step"},
      {"--crop", "crop", "Crop size (multiple of the padding unit)"},
      {"--lr", "lr", "Initial learning rate"},
      {"--seed", "seed", "Seed for initialization, crops and noise"},
      {"--log-every", "log_every", "Print a log line every N steps"},
  };
  for (const Flag& f : flags)
    cmd->add_option_function<std::string>(f.name, [&a, key = f.key](const std::string& v) { a.flags[key] = v; },
                                          f.help);
  cmd->callback([&] {
    action = [&a] {
      TrainSettings s;
      if (!a.config.empty()) s.load_file(a.config);
      for (const auto& [key, value] : a.flags)
        if (!s.set(key, value)) fail(ErrorKind::kInvalidArgument, "unknown setting " + key);
      s.model.validate();
      Model probe(s.model);
      s.train.validate(probe.pad_multiple());
      if (a.show_config) {
        std::cout << s.to_text();
        return;
      }
      if (a.data.empty() || a.out.empty()) fail(ErrorKind::kInvalidArgument, "train: --data and --out are required");
      DatasetCrops data = DatasetCrops::from_dir(a.data, s.train.crop, s.train.seed);
      Model model(s.model);
      std::ostringstream log;
      std::cout << "training " << to_string(s.model.architecture) << " (" << model.params().total_count()
                << " parameters) on " << data.size() << " images\n";
      const auto stats = train(model, data, s.train, [&](const TrainStats& st) {
        if (!std::isfinite(st.loss)) fail(ErrorKind::kNumeric, "train: loss became non-finite at step " + std::to_string(st.step));
        log << format_log_line(st) << "\n";
        if (s.log_every > 0 && (st.step + 1) % s.log_every == 0) std::cout << format_log_line(st) << std::endl;
        return true;
      });
      save_model(a.out, model);
      write_text(a.log.empty() ? a.out + ".log" : a.log, log.str());
      std::cout << "wrote " << a.out << " (model id " << std::hex << model.model_id() << std::dec << ")\n";
    };
  });
}

// ---------------------------------------------------------------------------
// compress / decompress

struct CodecArgs {
  std::string model, input, output;
  bool allow_mismatch = false;
};

void add_compress(CLI::App& app, CodecArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("compress", "Encode a PPM image into a .wbs bitstream");
  cmd->add_option("--model", a.model, "Checkpoint")->required();
  cmd->add_option("input", a.input, "Input .ppm")->required();
  cmd->add_option("-o,--output", a.output, "Output .wbs")->required();
  cmd->callback([&] {
    action = [&a] {
      const auto model = load_model(a.model);
      const Tensor image = read_ppm(a.input);
      const CompressResult r = compress(*model, image);
      const std::vector<uint8_t> bytes = write_bitstream(r.bitstream);
      write_file_atomic(a.output, bytes);
      const int64_t h = image.dim(1), w = image.dim(2);
      std::printf("%s: %lldx%lld, %zu bytes (payload %zu), %.4f bpp\n", a.output.c_str(), static_cast<long long>(w),
                  static_cast<long long>(h), bytes.size(), r.bitstream.payload_bytes(),
                  bits_per_pixel(8 * bytes.size(), h, w));
    };
  });
}

void add_decompress(CLI::App& app, CodecArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("decompress", "Decode a .wbs bitstream into a PPM image");
  cmd->add_option("--model", a.model, "Checkpoint")->required();
  cmd->add_option("input", a.input, "Input .wbs")->required();
  cmd->add_option("-o,--output", a.output, "Output .ppm")->required();
  cmd->add_flag("--allow-model-mismatch", a.allow_mismatch, "Decode even if the stream names another model");
  cmd->callback([&] {
    action = [&a] {
      const auto model = load_model(a.model);
      const Bitstream bs = read_bitstream(read_file(a.input));
      const DecompressResult r = decompress(*model, bs, a.allow_mismatch);
      if (!r.model_id_matched)
        std::fprintf(stderr, "warning: stream model id %08x differs from checkpoint %08x\n", bs.header.model_id,
                     model->model_id());
      write_ppm(a.output, r.image);
      std::printf("%s: %ux%u\n", a.output.c_str(), bs.header.width, bs.header.height);
    };
  });
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model, data, output, name;
};

void add_eval(CLI::App& app, EvalArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("eval", "Code every image in a directory and report rate and quality");
  cmd->add_option("--model", a.model, "Checkpoint")->required();
  cmd->add_option("--data", a.data, "Directory of .ppm images")->required();
  cmd->add_option("-o,--output", a.output, "RD table to write (default: stdout)");
  cmd->add_option("--name", a.name, "Model label in the table (default: checkpoint stem)");
  cmd->callback([&] {
    action = [&a] {
      const auto model = load_model(a.model);
      const auto paths = list_images(a.data);
      if (paths.empty()) fail(ErrorKind::kIo, "eval: no .ppm images in " + a.data);
      const std::string label = a.name.empty() ? fs::path(a.model).stem().string() : a.name;
      std::vector<RdPoint> points(paths.size());
      parallel_for(paths.size(), [&](size_t i) {
        const Tensor image = read_ppm(paths[i]);
        const std::vector<uint8_t> bytes = write_bitstream(compress(*model, image).bitstream);
        // Quality of what a decoder writes out: 8-bit pixels.
        const Tensor decoded = quantize_8bit(decompress(*model, read_bitstream(bytes)).image);
        RdPoint& p = points[i];
        p.image = paths[i].filename().string();
        p.model = label;
        p.lambda = model->config().lambda;
        p.bpp = bits_per_pixel(8 * bytes.size(), image.dim(1), image.dim(2));
        p.psnr = psnr(image, decoded);
        p.ms_ssim = ms_ssim(image, decoded);
      });
      const std::string table = rd_table(points);
      if (a.output.empty())
        std::cout << table;
      else
        write_text(a.output, table);
    };
  });
}

// ---------------------------------------------------------------------------
// rd-plot

struct PlotArgs {
  std::vector<std::string> tables;
  std::string output;
};

void add_rd_plot(CLI::App& app, PlotArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("rd-plot", "Merge RD tables into plot series and a model comparison");
  cmd->add_option("tables", a.tables, "RD tables written by eval")->required();
  cmd->add_option("-o,--output", a.output, "Series file (model, bpp, psnr, ms_ssim per line)");
  cmd->callback([&] {
    action = [&a] {
      std::vector<RdPoint> points;
      for (const auto& t : a.tables) {
        const auto part = parse_rd_table(read_text(t));
        points.insert(points.end(), part.begin(), part.end());
      }
      if (points.empty()) fail(ErrorKind::kFormat, "rd-plot: the tables contain no rows");
      if (!a.output.empty()) write_text(a.output, rd_series(points));
      std::printf("%-24s %10s %9s %9s %8s %6s\n", "model", "lambda", "PSNR(dB)", "bpp", "MS-SSIM", "images");
      for (const RdSummary& s : rd_average(points))
        std::printf("%-24s %10.4f %9.2f %9.4f %8.4f %6zu\n", s.model.c_str(), s.lambda, s.psnr, s.bpp, s.ms_ssim,
                    s.count);
    };
  });
}

// ---------------------------------------------------------------------------
// synth / info

struct SynthArgs {
  std::string out, pattern = "mix";
  int64_t count = 16, height = 64, width = 64;
  uint64_t seed = 0;
};

void add_synth(CLI::App& app, SynthArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("synth", "Write synthetic test images");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--pattern", a.pattern, "noise | gradient | shapes | texture | half-noise | mix");
  cmd->add_option("--count", a.count, "Number of images");
  cmd->add_option("--height", a.height, "Image height");
  cmd->add_option("--width", a.width, "Image width");
  cmd->add_option("--seed", a.seed, "First seed");
  cmd->callback([&] {
    action = [&a] {
      static const Pattern mix[] = {Pattern::kShapes, Pattern::kTexture, Pattern::kGradient, Pattern::kHalfNoise};
      if (a.count < 1) fail(ErrorKind::kInvalidArgument, "synth: --count must be positive");
      std::error_code ec;
      fs::create_directories(a.out, ec);
      if (ec) fail(ErrorKind::kIo, "cannot create " + a.out + ": " + ec.message());
      for (int64_t i = 0; i < a.count; ++i) {
        const Pattern p = a.pattern == "mix" ? mix[i % 4] : parse_pattern(a.pattern);
        char name[64];
        std::snprintf(name, sizeof name, "%s_%03lld.ppm", to_string(p).c_str(), static_cast<long long>(i));
        write_ppm(fs::path(a.out) / name, synthetic_image(p, a.height, a.width, a.seed + static_cast<uint64_t>(i)));
      }
      std::printf("wrote %lld images to %s\n", static_cast<long long>(a.count), a.out.c_str());
    };
  });
}

struct InfoArgs {
  std::string model;
};

void add_info(CLI::App& app, InfoArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("info", "Describe a checkpoint");
  cmd->add_option("--model", a.model, "Checkpoint")->required();
  cmd->callback([&] {
    action = [&a] {
      const auto model = load_model(a.model);
      std::printf("model id   %08x\nparameters %lld in %zu tensors\npad unit   %lld\n", model->model_id(),
                  static_cast<long long>(model->params().total_count()), model->params().size(),
                  static_cast<long long>(model->pad_multiple()));
      std::cout << model->config().to_text();
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wincodec: learned image compression with window attention"};
  app.require_subcommand(1);
  std::function<void()> action;
  TrainArgs train_args;
  CodecArgs compress_args, decompress_args;
  EvalArgs eval_args;
  PlotArgs plot_args;
  SynthArgs synth_args;
  InfoArgs info_args;
  add_train(app, train_args, action);
  add_compress(app, compress_args, action);
  add_decompress(app, decompress_args, action);
  add_eval(app, eval_args, action);
  add_rd_plot(app, plot_args, action);
  add_synth(app, synth_args, action);
  add_info(app, info_args, action);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  }
  return 0;
}
