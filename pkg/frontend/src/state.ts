/** View state for one feedback session: card ratings, submit gating, results. */

import type { FeedbackResponse, ResultEntry } from "./api.js";

export type Bit = 0 | 1;

export interface Card {
  entry: ResultEntry;
  bit: Bit | null;
}

export type Phase = "rating" | "submitting" | "refined" | "failed";

export class SessionView {
  readonly sessionId: string;
  readonly cards: Card[];
  phase: Phase = "rating";
  refined: ResultEntry[] | null = null;
  control: ResultEntry[] | null = null;
  showControl = false;

  constructor(sessionId: string, firstResults: ResultEntry[]) {
    this.sessionId = sessionId;
    this.cards = firstResults.map((entry) => ({ entry, bit: null }));
  }

  setBit(index: number, bit: Bit | null): void {
    if (this.phase !== "rating") {
      throw new Error(`cannot rate in phase ${this.phase}`);
    }
    const card = this.cards[index];
    if (!card) {
      throw new Error(`no card at index ${index}`);
    }
    card.bit = bit;
  }

  /** Flip between relevant -> irrelevant -> unrated. */
  cycleBit(index: number): void {
    const card = this.cards[index];
    if (!card) throw new Error(`no card at index ${index}`);
    const next: Bit | null = card.bit === null ? 1 : card.bit === 1 ? 0 : null;
    this.setBit(index, next);
  }

  get ratedCount(): number {
    return this.cards.filter((c) => c.bit !== null).length;
  }

  /** Submission is allowed only once every card has been rated. */
  get allRated(): boolean {
    return this.cards.every((c) => c.bit !== null);
  }

  bits(): number[] {
    if (!this.allRated) {
      throw new Error("all cards must be rated before submitting");
    }
    return this.cards.map((c) => c.bit as Bit);
  }

  applyFeedback(response: FeedbackResponse): void {
    this.control = response.control;
    if (response.failure) {
      this.phase = "failed";
      this.refined = null;
    } else {
      this.phase = "refined";
      this.refined = response.results ?? [];
    }
  }
}
