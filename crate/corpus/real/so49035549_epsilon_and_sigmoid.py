# Recreation of Stack Overflow question 49035549: CartPole agent whose
# exploration rate stops at 0.25. The hidden layers also use sigmoid
# activations, a network-design issue outside the DRL fault taxonomy.
import random
from collections import deque

import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense
from keras.optimizers import RMSprop

env = gym.make("CartPole-v0")
action_size = env.action_space.n

GAMMA = 0.9
EPSILON = 1.0
EPSILON_MIN = 0.25
EPSILON_DECAY = 0.999
BATCH_SIZE = 16
MEMORY_SIZE = 10000
EPOCHS = 1

memory = deque(maxlen=MEMORY_SIZE)

brain = Sequential([
    Dense(64, input_shape=(4,), activation="sigmoid"),
    Dense(64, activation="sigmoid"),
    Dense(action_size, activation="linear"),
])
brain.compile(loss="mse", optimizer=RMSprop(lr=0.00025))

for episode in range(3000):
    observation = env.reset()
    observation = np.reshape(observation, [1, 4])
    while True:
        if random.random() < EPSILON:
            action = random.randrange(action_size)
        else:
            action = np.argmax(brain.predict(observation)[0])
        new_observation, reward, done, info = env.step(action)
        new_observation = np.reshape(new_observation, [1, 4])
        memory.append((observation, action, reward, new_observation, done))
        observation = new_observation
        if done:
            break
        if len(memory) > BATCH_SIZE:
            batch = random.sample(memory, BATCH_SIZE)
            for s, a, r, s_, terminal in batch:
                q = brain.predict(s)
                if terminal:
                    q[0][a] = r
                else:
                    q[0][a] = r + GAMMA * np.amax(brain.predict(s_)[0])
                brain.fit(s, q, epochs=EPOCHS, verbose=0)
    if EPSILON > EPSILON_MIN:
        EPSILON *= EPSILON_DECAY

env.close()
