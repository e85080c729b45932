#pragma once

// Static semantics: read/write sets, in/out labels, process blocks and
// well-formedness.

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cril/syntax.hpp"

namespace cril {

/// A variable, or the whole heap `M` (the heap is a single resource).
class Resource {
 public:
  Resource() = default;
  explicit Resource(std::string name) : name_(std::move(name)) {}
  static Resource heap() { return Resource("M"); }

  bool is_heap() const { return name_ == "M"; }
  const std::string& name() const { return name_; }

  friend auto operator<=>(const Resource&, const Resource&) = default;
  friend bool operator==(const Resource&, const Resource&) = default;

 private:
  std::string name_;
};

using ResourceSet = std::set<Resource>;

std::string to_string(const ResourceSet& rs);
ResourceSet resources(std::initializer_list<const char*> names);

ResourceSet read_set(const BasicBlock& b);
ResourceSet write_set(const BasicBlock& b);

std::set<Label> in_labels(const BasicBlock& b);
std::set<Label> out_labels(const BasicBlock& b);

struct ProcessBlock {
  std::vector<BlockId> blocks;
  /// Labels of begin/end points inside the class (L2 of the class).
  std::set<Label> labels;
  /// The begin label when the class has exactly one.
  std::optional<Label> label;
};

struct ProcessBlockPartition {
  /// class_of[id - 1] is the class index of block `id`.
  std::vector<std::size_t> class_of;
  std::vector<ProcessBlock> classes;

  const ProcessBlock& of(BlockId id) const { return classes.at(class_of.at(id - 1)); }
};

ProcessBlockPartition process_blocks(const Program& p);

struct Violation {
  /// "1".."5" for the numbered conditions, otherwise a rule name such as
  /// "call-target" or "semaphore".
  std::string rule;
  std::vector<BlockId> blocks;
  std::vector<Label> labels;
  std::string message;
};

struct WellFormednessReport {
  bool ok = true;
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  std::string to_text() const;
};

WellFormednessReport check_well_formed(const Program& p);

class NotWellFormed : public std::runtime_error {
 public:
  explicit NotWellFormed(WellFormednessReport report);
  const WellFormednessReport& report() const { return report_; }

 private:
  WellFormednessReport report_;
};

}  // namespace cril
