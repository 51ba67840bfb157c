"""Tests for personality traits, entity mapping, and prompt assembly."""

import json

import pytest

from playprobe.personality import (
    PERSONALITY_SENTINEL,
    TRAIT_ORDER,
    EntityMapping,
    PersonalityError,
    PersonalityTrait,
    UnknownTrait,
    UnmappedEntity,
    build_agent_prompt,
    default_entity_mapping,
    default_traits,
    load_mapping,
    load_traits,
    map_entity,
    substitute_entities,
    trait_by_name,
)


class TestCatalog:
    def test_seven_traits_in_stable_order(self):
        traits = default_traits()
        assert len(traits) == 7
        assert tuple(t.identifier for t in traits) == TRAIT_ORDER
        assert len(set(TRAIT_ORDER)) == 7

    def test_trait_by_name_case_insensitive(self):
        assert trait_by_name("aggression").identifier == "Aggression"

    def test_trait_by_name_unknown(self):
        with pytest.raises(UnknownTrait):
            trait_by_name("Bravery")

    def test_empty_fragment_rejected(self):
        with pytest.raises(PersonalityError):
            PersonalityTrait(identifier="X", description="d", prompt_fragment="  ")

    def test_referenced_entities_sorted_unique(self):
        trait = PersonalityTrait(
            identifier="X", description="d",
            prompt_fragment="seek [[Loot Item]], fight [[Enemy Hazard]], "
                            "hoard [[Loot Item]]")
        assert trait.referenced_entities() == ["Enemy Hazard", "Loot Item"]


class TestEntityMapping:
    def mapping(self):
        return EntityMapping(entries=(
            ("Enemy Hazard", "rat", "hostile creature"),
            ("Loot Item", "sword", "pickup"),
        ))

    def test_lookup_case_insensitive(self):
        assert map_entity(self.mapping(), "enemy hazard") == "rat"

    def test_lookup_missing_raises(self):
        with pytest.raises(UnmappedEntity):
            self.mapping().lookup("Shopkeeper")

    def test_covers_reports_missing(self):
        missing = self.mapping().covers(["Loot Item", "Shopkeeper"])
        assert missing == ["Shopkeeper"]

    def test_empty_entry_rejected(self):
        with pytest.raises(PersonalityError):
            EntityMapping(entries=(("", "rat", ""),))

    def test_round_trips_through_dict(self):
        m = self.mapping()
        assert EntityMapping.from_dict(m.to_dict()) == m

    def test_default_mapping_covers_all_default_fragments(self):
        mapping = default_entity_mapping()
        for trait in default_traits():
            assert mapping.covers(trait.referenced_entities()) == []


class TestSubstitution:
    def test_placeholders_replaced(self):
        mapping = EntityMapping(entries=(("Enemy Hazard", "slime", ""),))
        out = substitute_entities("charge the [[Enemy Hazard]]!", mapping)
        assert out == "charge the slime!"
        assert "[[" not in out

    def test_missing_placeholder_raises_with_names(self):
        mapping = EntityMapping(entries=(("Enemy Hazard", "slime", ""),))
        with pytest.raises(UnmappedEntity) as exc:
            substitute_entities("open the [[Treasure Chest]]", mapping)
        assert exc.value.missing == ["Treasure Chest"]


class TestPromptAssembly:
    def test_prompt_contains_sentinel_game_and_persona(self):
        trait = trait_by_name("Caution")
        prompt = build_agent_prompt(trait, "A deadly dungeon.",
                                    default_entity_mapping())
        assert f"{PERSONALITY_SENTINEL} Caution" in prompt
        assert "A deadly dungeon." in prompt
        assert "[[" not in prompt

    def test_prompts_differ_across_traits(self):
        mapping = default_entity_mapping()
        prompts = {build_agent_prompt(t, "G", mapping) for t in default_traits()}
        assert len(prompts) == 7

    def test_prompt_is_pure(self):
        trait = trait_by_name("Curiosity")
        mapping = default_entity_mapping()
        assert build_agent_prompt(trait, "G", mapping) == \
            build_agent_prompt(trait, "G", mapping)


class TestDefinitionFiles:
    def test_traits_file_roundtrip(self, tmp_path):
        path = tmp_path / "traits.json"
        doc = {"traits": [
            {"identifier": t.identifier, "description": t.description,
             "prompt_fragment": t.prompt_fragment}
            for t in default_traits()]}
        path.write_text(json.dumps(doc), encoding="utf-8")
        assert load_traits(str(path)) == default_traits()

    def test_traits_file_must_cover_all_seven(self, tmp_path):
        path = tmp_path / "traits.json"
        doc = {"traits": [{"identifier": "Aggression", "description": "",
                           "prompt_fragment": "fight"}]}
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(PersonalityError):
            load_traits(str(path))

    def test_mapping_file_roundtrip(self, tmp_path):
        path = tmp_path / "mapping.json"
        mapping = default_entity_mapping()
        path.write_text(json.dumps(mapping.to_dict()), encoding="utf-8")
        assert load_mapping(str(path)) == mapping
