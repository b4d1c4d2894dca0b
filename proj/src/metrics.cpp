#include "beet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "beet/error.hpp"

namespace beet {

ConfusionTotals& ConfusionTotals::operator+=(const ConfusionTotals& other) {
  for (int c = 0; c < kNumClasses; ++c) {
    tp[c] += other.tp[c];
    fp[c] += other.fp[c];
    fn[c] += other.fn[c];
  }
  pixels += other.pixels;
  return *this;
}

ConfusionTotals confusion(const SemanticMask& pred, const SemanticMask& gt,
                          const BinaryMask* roi) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw ValidationError("confusion: prediction and ground truth differ in size");
  }
  if (roi && (roi->width() != gt.width() || roi->height() != gt.height())) {
    throw ValidationError("confusion: roi differs in size");
  }
  const std::uint8_t* p = pred.cells().data();
  const std::uint8_t* g = gt.cells().data();
  const std::uint8_t* r = roi ? roi->cells().data() : nullptr;
  const int width = gt.width();
  const int height = gt.height();

  ConfusionTotals totals;
#pragma omp parallel
  {
    ConfusionTotals local;
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * width;
      for (int x = 0; x < width; ++x) {
        const std::size_t i = row + x;
        if (r && !r[i]) continue;
        const std::uint8_t gc = g[i];
        const std::uint8_t pc = p[i];
        ++local.pixels;
        if (gc == pc) {
          ++local.tp[gc];
        } else {
          ++local.fn[gc];
          ++local.fp[pc];
        }
      }
    }
#pragma omp critical(beet_confusion_merge)
    totals += local;
  }
  return totals;
}

MiouResult miou(const ConfusionTotals& totals) {
  MiouResult result;
  double sum = 0.0;
  int evaluable = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::uint64_t denom = totals.tp[c] + totals.fp[c] + totals.fn[c];
    if (denom == 0) continue;
    const double iou = static_cast<double>(totals.tp[c]) / static_cast<double>(denom);
    result.per_class[c] = iou;
    sum += iou;
    ++evaluable;
  }
  if (evaluable == 0) throw ValidationError("no evaluable classes");
  result.mean = sum / evaluable;
  return result;
}

MiouResult miou(std::span<const ConfusionTotals> samples, MiouMode mode) {
  if (mode == MiouMode::Aggregate) {
    ConfusionTotals sum;
    for (const ConfusionTotals& s : samples) sum += s;
    return miou(sum);
  }
  if (samples.empty()) throw ValidationError("no evaluable classes");
  MiouResult result;
  std::array<double, kNumClasses> class_sum{};
  std::array<int, kNumClasses> class_count{};
  double mean_sum = 0.0;
  for (const ConfusionTotals& s : samples) {
    const MiouResult one = miou(s);
    mean_sum += one.mean;
    for (int c = 0; c < kNumClasses; ++c) {
      if (!one.per_class[c]) continue;
      class_sum[c] += *one.per_class[c];
      ++class_count[c];
    }
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (class_count[c] > 0) result.per_class[c] = class_sum[c] / class_count[c];
  }
  result.mean = mean_sum / static_cast<double>(samples.size());
  return result;
}

ProbabilityRaster ProbabilityRaster::one_hot(const SemanticMask& mask) {
  ProbabilityRaster out(mask.width(), mask.height());
  const auto cells = mask.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) out.at(cells[i], i) = 1.0;
  return out;
}

double dice_loss(const ProbabilityRaster& pred, const SemanticMask& gt, double epsilon) {
  if (pred.width != gt.width() || pred.height != gt.height() ||
      pred.data.size() != pred.plane() * kNumClasses) {
    throw ValidationError("dice_loss: probability raster and mask differ in shape");
  }
  if (!(epsilon > 0.0)) throw ValidationError("dice_loss: epsilon must be positive");

  const int width = gt.width();
  const int height = gt.height();
  const std::uint8_t* g = gt.cells().data();
  // Per-row partial sums reduced serially afterwards, so the result does not
  // depend on the thread count.
  struct RowSums {
    std::array<double, kNumClasses> inter{};
    std::array<double, kNumClasses> pred{};
    std::array<std::uint64_t, kNumClasses> truth{};
    bool valid = true;
  };
  std::vector<RowSums> rows(static_cast<std::size_t>(height));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    RowSums& acc = rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      double total = 0.0;
      for (int c = 0; c < kNumClasses; ++c) {
        const double p = pred.at(c, i);
        if (!(p >= 0.0 && p <= 1.0)) acc.valid = false;
        total += p;
        acc.pred[c] += p;
      }
      if (std::abs(total - 1.0) > 1e-6) acc.valid = false;
      acc.inter[g[i]] += pred.at(g[i], i);
      acc.truth[g[i]] += 1;
    }
  }
  RowSums sum;
  for (const RowSums& r : rows) {
    if (!r.valid) throw ValidationError("dice_loss: invalid probabilities");
    for (int c = 0; c < kNumClasses; ++c) {
      sum.inter[c] += r.inter[c];
      sum.pred[c] += r.pred[c];
      sum.truth[c] += r.truth[c];
    }
  }
  double loss = 0.0;
  int present = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (sum.truth[c] == 0) continue;
    const double truth = static_cast<double>(sum.truth[c]);
    loss += 1.0 - (2.0 * sum.inter[c] + epsilon) / (sum.pred[c] + truth + epsilon);
    ++present;
  }
  return present ? loss / present : 0.0;
}

MetaBreakdown meta_breakdown(std::span<const SampleScore> samples) {
  MetaBreakdown b;
  auto add = [](BreakdownCell& cell, double v) {
    cell.count += 1;
    cell.mean += v;  // sum for now
  };
  for (const SampleScore& s : samples) {
    add(b.lighting[static_cast<std::size_t>(s.meta.lighting)], s.miou);
    add(b.moisture[static_cast<std::size_t>(s.meta.moisture)], s.miou);
    add(b.stage[static_cast<std::size_t>(s.meta.stage)], s.miou);
    add(b.overall, s.miou);
  }
  auto finish = [](BreakdownCell& cell) {
    if (cell.count) cell.mean /= static_cast<double>(cell.count);
  };
  for (auto& c : b.lighting) finish(c);
  for (auto& c : b.moisture) finish(c);
  for (auto& c : b.stage) finish(c);
  finish(b.overall);
  return b;
}

std::string meta_breakdown_csv(const MetaBreakdown& b) {
  std::ostringstream out;
  out.precision(17);
  out << "category,value,count,mean_miou\n";
  auto line = [&](std::string_view cat, std::string_view value, const BreakdownCell& c) {
    out << cat << ',' << value << ',' << c.count << ',';
    if (c.count) out << c.mean;
    out << '\n';
  };
  for (Lighting l : kAllLightings) line("lighting", to_string(l), b.lighting[static_cast<int>(l)]);
  for (Moisture m : kAllMoistures) line("moisture", to_string(m), b.moisture[static_cast<int>(m)]);
  for (Stage s : kAllStages) line("stage", to_string(s), b.stage[static_cast<int>(s)]);
  line("overall", "all", b.overall);
  return out.str();
}

std::string iou_table_csv(const MiouResult& r) {
  std::ostringstream out;
  out.precision(17);
  for (SemanticClass c : kAllClasses) out << to_string(c) << ',';
  out << "Mean\n";
  for (SemanticClass c : kAllClasses) {
    if (r.per_class[index_of(c)]) out << *r.per_class[index_of(c)];
    out << ',';
  }
  out << r.mean << '\n';
  return out.str();
}

std::string iou_table_text(const MiouResult& r) {
  std::string out;
  char buf[32];
  for (SemanticClass c : kAllClasses) {
    std::snprintf(buf, sizeof buf, "%7.*s", static_cast<int>(to_string(c).size()),
                  to_string(c).data());
    out += buf;
  }
  out += "    Mean\n";
  for (SemanticClass c : kAllClasses) {
    const auto& v = r.per_class[index_of(c)];
    if (v) {
      std::snprintf(buf, sizeof buf, "%7.1f", 100.0 * *v);
    } else {
      std::snprintf(buf, sizeof buf, "%7s", "-");
    }
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%8.1f\n", 100.0 * r.mean);
  out += buf;
  return out;
}

}  // namespace beet
