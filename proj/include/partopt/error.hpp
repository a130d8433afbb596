/*
Copyright 2026 The partopt Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace partopt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnboundParameter : public Error {
public:
  explicit UnboundParameter(std::string name)
      : Error("unbound parameter '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

class UnknownState : public Error {
public:
  explicit UnknownState(const std::string& name) : Error("unknown state '" + name + "'") {}
};

/// A model, policy or mask that is structurally inconsistent with its target.
class ModelError : public Error {
public:
  using Error::Error;
};

class PruneError : public Error {
public:
  enum class Kind { InitialStateEliminated, InvalidDistribution };
  PruneError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class EmptyPartition : public Error {
public:
  EmptyPartition() : Error("partition has no components") {}
};

class SearchError : public Error {
public:
  enum class Kind { EmptyCandidateSet, AllCandidatesFailed, TooManyCandidates };
  SearchError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class ConfigInvalid : public Error {
public:
  explicit ConfigInvalid(const std::string& reason) : Error("invalid case config: " + reason) {}
};

}  // namespace partopt
