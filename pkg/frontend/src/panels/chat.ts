// Conversational access to the pipeline. Every response carries the whole
// transcript, so the panel re-renders from the server's turns each time;
// tool calls show up as expandable cards with the raw arguments and result.

import type { ApiClient, ChatTurnDoc } from "../api.js";
import { ApiError } from "../api.js";
import { clear, el } from "../dom.js";

export class ChatPanel {
  readonly root: HTMLElement;
  private transcript: HTMLElement;
  private input: HTMLInputElement;
  private send: HTMLButtonElement;
  private conversationId: string | null = null;
  lastRequest: Promise<void> = Promise.resolve();

  constructor(container: HTMLElement, private api: ApiClient) {
    this.root = container;
    this.root.classList.add("panel");
    this.root.append(el("h2", {}, ["Chat"]));
    this.transcript = el("div", { class: "transcript", "data-role": "chat-transcript" });
    this.input = el("input", {
      type: "text",
      placeholder: "ask about the pipeline",
      "data-role": "chat-input",
    });
    this.send = el("button", { class: "primary", "data-role": "chat-send" }, ["send"]);
    const form = el("form", { class: "chat-form" }, [this.input, this.send]);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.submit();
    });
    this.root.append(this.transcript, form);
  }

  get activeConversation(): string | null {
    return this.conversationId;
  }

  private submit(): void {
    const message = this.input.value.trim();
    if (!message || this.send.disabled) return;
    this.lastRequest = this.sendMessage(message);
  }

  private async sendMessage(message: string): Promise<void> {
    this.input.disabled = true;
    this.send.disabled = true;
    try {
      const doc = await this.api.chat(message, this.conversationId ?? undefined);
      this.conversationId = doc.conversation_id;
      this.renderTurns(doc.turns, doc.truncated);
      this.input.value = "";
    } catch (err) {
      const text = err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : (err as Error).message;
      this.transcript.append(
        el("div", { class: "bubble error", "data-role": "chat-error" }, [text]));
    } finally {
      this.input.disabled = false;
      this.send.disabled = false;
    }
  }

  private renderTurns(turns: ChatTurnDoc[], truncated: boolean): void {
    clear(this.transcript);
    const openCards = new Map<string, HTMLElement>();
    for (const turn of turns) {
      if (turn.tool_call) {
        const card = el("details", {
          class: "tool-card",
          "data-tool": turn.tool_call.tool_name,
        }, [
          el("summary", {}, [
            `${turn.tool_call.tool_name}(${JSON.stringify(turn.tool_call.arguments)})`,
          ]),
        ]);
        openCards.set(turn.tool_call.call_id, card);
        this.transcript.append(card);
      } else if (turn.tool_result) {
        const card = openCards.get(turn.tool_result.call_id);
        const pre = el("pre", {}, [JSON.stringify(turn.tool_result.result, null, 2)]);
        if (card) {
          card.append(pre);
        } else {
          this.transcript.append(el("details", { class: "tool-card" }, [
            el("summary", {}, [`result for ${turn.tool_result.call_id}`]), pre,
          ]));
        }
      } else if (turn.content) {
        this.transcript.append(el("div", {
          class: `bubble ${turn.role === "user" ? "user" : "assistant"}`,
        }, [turn.content]));
      }
    }
    if (truncated) {
      this.transcript.append(el("div", { class: "note" },
        ["conversation hit the tool-round limit"]));
    }
  }
}
